"""Per-document records, corpus reports and the metric comparison table."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .core import ClusterSet, canonicalize
from .metrics import CorpusScores, DocumentScores, SimilarityKind, aggregate_corpus

CEAF_RECALL_NOTE = "CEAF recall = aligned similarity / sum of gold self-similarity"
TABLE_ROWS = (("CoNLL F1", "conll"), ("MUC F1", "muc"), ("B-Cubed F1", "b_cubed"), ("CEAF F1", "ceaf"))


@dataclass(frozen=True)
class DocumentRecord:
    doc_id: str
    gold: ClusterSet
    predicted: ClusterSet | None
    scores: DocumentScores | None  # None when the document was excluded from scoring
    consistency: str | None = None  # None when no model was involved
    flags: tuple[str, ...] = ()

    def to_dict(self, phi: SimilarityKind = SimilarityKind.PHI3) -> dict:
        d = {
            "doc_id": self.doc_id,
            "n_mentions": self.gold.n_mentions,
            "gold": self.gold.to_json(),
            "predicted": self.predicted.to_json() if self.predicted else None,
            "consistency": self.consistency,
            "flags": list(self.flags),
            "scored": self.scores is not None,
        }
        if self.scores is not None:
            s = self.scores.to_dict(phi)
            d["metrics"] = s["metrics"]
            d["conll_f1"] = s["conll_f1"]
            d["flags"] = sorted(set(d["flags"]) | set(s["flags"]))
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DocumentRecord":
        n = d["n_mentions"]
        scores = DocumentScores.from_dict(d) if d.get("scored") else None
        pred = canonicalize(d["predicted"], n) if d.get("predicted") is not None else None
        return cls(d["doc_id"], canonicalize(d["gold"], n), pred, scores, d.get("consistency"), tuple(d.get("flags", ())))


def _rate(records: Sequence[DocumentRecord], value: str) -> float | None:
    judged = [r for r in records if r.consistency is not None]
    if not judged:
        return None
    return sum(r.consistency == value for r in judged) / len(judged)


@dataclass
class MetricReport:
    model: str
    records: list[DocumentRecord]
    corpus: CorpusScores | None
    phi: SimilarityKind = SimilarityKind.PHI3
    aggregation: str = "micro"
    metadata: dict = field(default_factory=dict)

    @property
    def consistency_rate(self) -> float | None:
        return _rate(self.records, "CLEAN")

    @property
    def recovery_rate(self) -> float | None:
        return _rate(self.records, "RECOVERED")

    @property
    def unparseable_rate(self) -> float | None:
        return _rate(self.records, "UNPARSEABLE")

    @property
    def failed_documents(self) -> list[str]:
        return [r.doc_id for r in self.records if "request_failed" in r.flags]

    @property
    def excluded_documents(self) -> list[str]:
        return [r.doc_id for r in self.records if r.scores is None]

    def headline(self, aggregation: str | None = None) -> dict[str, float]:
        """F1 per table row under the chosen aggregation."""
        agg = aggregation or self.aggregation
        if self.corpus is None:
            return {key: 0.0 for _, key in TABLE_ROWS}
        source = self.corpus.micro if agg == "micro" else self.corpus.macro
        ceaf_key = f"ceaf_{self.phi.value}"
        return {
            "conll": self.corpus.conll_micro if agg == "micro" else self.corpus.conll_macro,
            "muc": source["muc"].f1,
            "b_cubed": source["b_cubed"].f1,
            "ceaf": source[ceaf_key].f1,
        }

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "aggregation": self.aggregation,
            "ceaf_phi": self.phi.value,
            "n_documents": len(self.records),
            "n_scored": len(self.records) - len(self.excluded_documents),
            "headline": self.headline(),
            "consistency": {
                "consistency_rate": self.consistency_rate,
                "recovery_rate": self.recovery_rate,
                "unparseable_rate": self.unparseable_rate,
            },
            "failed_documents": self.failed_documents,
            "excluded_documents": self.excluded_documents,
            "corpus": self.corpus.to_dict() if self.corpus else None,
            "metadata": self.metadata,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def build_report(
    records: Sequence[DocumentRecord],
    model: str,
    phi: SimilarityKind = SimilarityKind.PHI3,
    aggregation: str = "micro",
    metadata: dict | None = None,
) -> MetricReport:
    if aggregation not in ("micro", "macro"):
        raise ValueError(f"aggregation must be micro or macro, got {aggregation!r}")
    records = sorted(records, key=lambda r: r.doc_id)
    scored = [r.scores for r in records if r.scores is not None]
    corpus = aggregate_corpus(scored, phi) if scored else None
    meta = {"ceaf_recall": CEAF_RECALL_NOTE, "ceaf_phi": phi.value, "aggregation": aggregation}
    meta.update(metadata or {})
    return MetricReport(model, list(records), corpus, phi, aggregation, meta)


def metric_table_csv(reports: Sequence[MetricReport], digits: int = 3) -> str:
    """One row per metric, one column per report."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["Metric"] + [r.model for r in reports])
    heads = [r.headline() for r in reports]
    for label, key in TABLE_ROWS:
        writer.writerow([label] + [f"{h[key]:.{digits}f}" for h in heads])
    return buf.getvalue()


def write_document_records(records: Sequence[DocumentRecord], directory: Path, phi: SimilarityKind) -> None:
    directory.mkdir(parents=True, exist_ok=True)
    for r in records:
        path = directory / f"{r.doc_id}.json"
        path.write_text(json.dumps(r.to_dict(phi), ensure_ascii=False, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def read_document_records(directory: Path) -> list[DocumentRecord]:
    return [
        DocumentRecord.from_dict(json.loads(p.read_text(encoding="utf-8")))
        for p in sorted(directory.glob("*.json"))
    ]
