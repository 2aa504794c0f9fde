"""Command-line entry point.

Exit status: 0 on success, 1 when findings or per-file errors were reported,
2 for usage and configuration errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import apply_overrides, config_to_dict, load_config
from .core import ClusterSet, ConfigError, CorefError
from .corpus import CorpusError, corpus_files, doc_id_for, load_corpus, load_document, read_clusters, write_text
from .harness import BudgetExceeded, FewShotExemplar, TokenBudget, build_fewshot_prompt, build_final_prompt, run_evaluation
from .metrics import SimilarityKind, score_document
from .report import (
    DocumentRecord,
    build_report,
    metric_table_csv,
    read_document_records,
    write_document_records,
)
from .sacr import lint_guidelines
from .transform import build_gold_clusters, corpus_stats, format_stats_table, index_document


def _json(data) -> str:
    return json.dumps(data, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def cmd_validate(args) -> int:
    problems = 0
    loaded = 0
    for path in corpus_files(args.dir):
        try:
            item = load_document(path, strict=args.strict)
        except CorpusError as exc:
            print(f"ERROR {exc}")
            problems += 1
            continue
        loaded += 1
        for w in item.warnings:
            print(f"{path}: {w}")
        findings = lint_guidelines(item.doc)
        for f in findings:
            print(f"{path}: {f}")
        problems += len(item.warnings) + len(findings)
    print(f"{loaded} document(s) checked, {problems} problem(s)")
    return 1 if problems else 0


def cmd_index(args) -> int:
    out = Path(args.output or args.dir)
    for item in load_corpus(args.dir):
        write_text(out / f"{item.doc.doc_id}.indexed.txt", index_document(item.doc).indexed_text)
    return 0


def cmd_gold(args) -> int:
    out = Path(args.output or args.dir)
    for item in load_corpus(args.dir):
        write_text(out / f"{item.doc.doc_id}.indexed.txt", index_document(item.doc).indexed_text)
        write_text(out / f"{item.doc.doc_id}.gold.json", build_gold_clusters(item.doc).serialize() + "\n")
    return 0


def cmd_stats(args) -> int:
    docs = [item.doc for item in load_corpus(args.dir)]
    if not docs:
        raise CorpusError(f"{args.dir}: no documents")
    fewshot_ids = set(args.fewshot or ())
    if fewshot_ids:
        unknown = fewshot_ids - {d.doc_id for d in docs}
        if unknown:
            raise ConfigError(f"few-shot ids not in {args.dir}: {sorted(unknown)}")
        rows = [
            ("Few-shot", corpus_stats([d for d in docs if d.doc_id in fewshot_ids])),
            ("Evaluation", corpus_stats([d for d in docs if d.doc_id not in fewshot_ids])),
        ]
    else:
        rows = [("Corpus", corpus_stats(docs))]
    sys.stdout.write(format_stats_table(rows))
    print("Average length counts whitespace-delimited tokens.")
    return 0


def _split_corpus(cfg):
    if cfg.corpus_dir is None:
        raise ConfigError("corpus_dir is not set")
    docs = {item.doc.doc_id: item.doc for item in load_corpus(cfg.corpus_dir)}
    missing = [i for i in cfg.exemplar_ids if i not in docs]
    if missing:
        raise ConfigError(f"exemplar ids not found in {cfg.corpus_dir}: {missing}")
    exemplars = [docs[i] for i in cfg.exemplar_ids]
    evaluation = [d for i, d in docs.items() if i not in set(cfg.exemplar_ids)]
    return exemplars, evaluation


def cmd_prompt(args) -> int:
    target = load_document(args.doc).doc
    budget = TokenBudget(args.budget) if args.budget else None
    if args.config:
        cfg = load_config(args.config)
        exemplars, _ = _split_corpus(cfg)
        budget = budget or cfg.budget
    else:
        exemplars = [load_document(p).doc for p in args.exemplar or ()]
    if not exemplars:
        raise ConfigError("give --exemplar files or a --config naming exemplar_ids")
    fewshot = build_fewshot_prompt([FewShotExemplar.from_document(d) for d in exemplars])
    try:
        prompt = build_final_prompt(fewshot, index_document(target), budget or TokenBudget(8192))
    except BudgetExceeded as exc:
        print(f"{args.doc}: {exc}", file=sys.stderr)
        return 1
    print(prompt)
    return 0


def cmd_run(args) -> int:
    cfg = apply_overrides(
        load_config(args.config),
        mode=args.mode,
        cassette=args.cassette,
        model_name=args.model,
        base_url=args.base_url,
        api_key_env=args.api_key_env,
        max_tokens=args.budget,
        phi=args.phi,
        aggregation=args.aggregation,
        concurrency=args.concurrency,
        output_dir=args.output,
    )
    if cfg.output_dir is None:
        raise ConfigError("output_dir is not set (config or --output)")
    exemplars, evaluation = _split_corpus(cfg)
    run = run_evaluation(evaluation, exemplars, cfg)
    out = cfg.output_dir
    manifest = {
        "tool_version": __version__,
        "model": cfg.model.model,
        "config": config_to_dict(cfg),
        "documents": sorted(d.doc_id for d in evaluation),
        "report_metadata": run.report.metadata,
    }
    write_text(out / "manifest.json", _json(manifest))
    write_text(
        out / "exchanges.jsonl",
        "".join(json.dumps(ex.to_dict(), ensure_ascii=False, sort_keys=True) + "\n" for ex in run.exchanges),
    )
    write_document_records(run.report.records, out / "scores", cfg.phi)
    _write_report(run.report, out)
    _print_summary(run.report)
    return 1 if run.report.failed_documents else 0


def _write_report(report, out: Path, digits: int = 3) -> None:
    write_text(out / "report.json", report.to_json())
    write_text(out / "report.csv", metric_table_csv([report], digits))


def _print_summary(report) -> None:
    sys.stdout.write(metric_table_csv([report]))
    if report.consistency_rate is not None:
        print(
            f"consistency rate {report.consistency_rate:.3f}, recovery rate {report.recovery_rate:.3f}, "
            f"unparseable rate {report.unparseable_rate:.3f}"
        )
    for doc_id in report.failed_documents:
        print(f"request failed: {doc_id}", file=sys.stderr)


def _load_gold_dir(directory: Path) -> dict[str, ClusterSet]:
    jsons = sorted(directory.glob("*.gold.json"))
    if jsons:
        return {doc_id_for(p): read_clusters(p) for p in jsons}
    return {item.doc.doc_id: build_gold_clusters(item.doc) for item in load_corpus(directory)}


def cmd_score(args) -> int:
    gold = _load_gold_dir(Path(args.gold_dir))
    if not gold:
        raise CorpusError(f"{args.gold_dir}: no gold documents")
    pred_dir = Path(args.pred_dir)
    if not pred_dir.is_dir():
        raise CorpusError(f"{pred_dir}: not a directory")
    preds = {doc_id_for(p): p for p in sorted(pred_dir.glob("*.json"))}
    records = []
    problems = 0
    for doc_id, g in sorted(gold.items()):
        flags: tuple[str, ...] = ()
        if doc_id in preds:
            pred = read_clusters(preds[doc_id], g.n_mentions)
        else:
            print(f"{pred_dir}: no prediction for {doc_id}; scored as singletons", file=sys.stderr)
            pred, flags = ClusterSet.singletons(g.n_mentions), ("missing_prediction",)
            problems += 1
        records.append(DocumentRecord(doc_id, g, pred, score_document(g, pred, doc_id), None, flags))
    phi = SimilarityKind(args.phi)
    report = build_report(records, args.label, phi, args.aggregation)
    if args.output:
        out = Path(args.output)
        write_document_records(report.records, out / "scores", phi)
        _write_report(report, out)
    sys.stdout.write(metric_table_csv([report], args.digits))
    return 1 if problems else 0


def cmd_report(args) -> int:
    reports = []
    for run_dir in map(Path, args.run_dirs):
        manifest_path = run_dir / "manifest.json"
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except (OSError, ValueError) as exc:
            raise CorpusError(f"{manifest_path}: {exc}") from exc
        meta = dict(manifest.get("report_metadata", {}))
        phi = SimilarityKind(args.phi or meta.get("ceaf_phi", "phi3"))
        aggregation = args.aggregation or meta.get("aggregation", "micro")
        records = read_document_records(run_dir / "scores")
        if not records:
            raise CorpusError(f"{run_dir / 'scores'}: no score files")
        meta.pop("ceaf_phi", None)
        meta.pop("aggregation", None)
        report = build_report(records, manifest.get("model", run_dir.name), phi, aggregation, meta)
        _write_report(report, run_dir, args.digits)
        reports.append(report)
    table = metric_table_csv(reports, args.digits)
    if args.output:
        write_text(Path(args.output), table)
    sys.stdout.write(table)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vicoref", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", help="parse and lint every document in a directory")
    s.add_argument("dir")
    s.add_argument("--strict", action="store_true", help="treat stray braces as errors")
    s.set_defaults(func=cmd_validate)

    for name, func, text in (("index", cmd_index, "write <doc>.indexed.txt files"),
                             ("gold", cmd_gold, "write <doc>.indexed.txt and <doc>.gold.json files")):
        s = sub.add_parser(name, help=text)
        s.add_argument("dir")
        s.add_argument("-o", "--output", help="output directory (default: the input directory)")
        s.set_defaults(func=func)

    s = sub.add_parser("stats", help="document, length, mention and entity counts")
    s.add_argument("dir")
    s.add_argument("--fewshot", nargs="+", metavar="DOC_ID", help="split rows into few-shot and evaluation")
    s.set_defaults(func=cmd_stats)

    s = sub.add_parser("prompt", help="print the final prompt for one document")
    s.add_argument("doc")
    s.add_argument("--exemplar", action="append", help="annotated exemplar file (repeatable)")
    s.add_argument("--config", help="take exemplars and budget from a run config")
    s.add_argument("--budget", type=int, help="token budget")
    s.set_defaults(func=cmd_prompt)

    s = sub.add_parser("run", help="full evaluation (live, record or replay)")
    s.add_argument("config")
    s.add_argument("--mode", choices=("live", "record", "replay"))
    s.add_argument("--cassette", type=Path)
    s.add_argument("--model")
    s.add_argument("--base-url")
    s.add_argument("--api-key-env")
    s.add_argument("--budget", type=int)
    s.add_argument("--phi", choices=("phi3", "phi4"))
    s.add_argument("--aggregation", choices=("micro", "macro"))
    s.add_argument("--concurrency", type=int)
    s.add_argument("-o", "--output", type=Path, help="run directory")
    s.set_defaults(func=cmd_run)

    s = sub.add_parser("score", help="score prediction files against gold")
    s.add_argument("gold_dir", help="*.gold.json files or annotated *.txt documents")
    s.add_argument("pred_dir", help="<doc_id>.json cluster files")
    s.add_argument("--phi", choices=("phi3", "phi4"), default="phi3")
    s.add_argument("--aggregation", choices=("micro", "macro"), default="micro")
    s.add_argument("--label", default="prediction", help="column name in the table")
    s.add_argument("--digits", type=int, default=3)
    s.add_argument("-o", "--output", help="directory for per-document scores and report files")
    s.set_defaults(func=cmd_score)

    s = sub.add_parser("report", help="metric table (CSV) and JSON report from run directories")
    s.add_argument("run_dirs", nargs="+")
    s.add_argument("--phi", choices=("phi3", "phi4"))
    s.add_argument("--aggregation", choices=("micro", "macro"))
    s.add_argument("--digits", type=int, default=3)
    s.add_argument("-o", "--output", help="also write the combined CSV here")
    s.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except CorefError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
