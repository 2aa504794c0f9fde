"""End-to-end evaluation: index, prompt, query, parse, score, aggregate."""

from __future__ import annotations

import random
import time
from concurrent.futures import ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import httpx

from ..core import AnnotatedDocument, ClusterSet, ConfigError
from ..metrics import SimilarityKind, score_document
from ..report import DocumentRecord, MetricReport, build_report
from ..transform import build_gold_clusters, index_document
from .client import Cassette, CassetteMiss, ModelConfig, TransportError, complete
from .prompt import PROMPT_VERSION, BudgetExceeded, FewShotExemplar, TokenBudget, build_fewshot_prompt, build_final_prompt
from .response import Consistency, parse_response

UNPARSEABLE_POLICIES = ("singletons", "exclude")


@dataclass(frozen=True)
class RunConfig:
    model: ModelConfig = field(default_factory=ModelConfig)
    exemplar_ids: tuple[str, ...] = ()
    budget: TokenBudget = field(default_factory=lambda: TokenBudget(8192))
    phi: SimilarityKind = SimilarityKind.PHI3
    aggregation: str = "micro"
    unparseable: str = "singletons"
    concurrency: int = 4
    corpus_dir: Path | None = None
    output_dir: Path | None = None

    def __post_init__(self):
        if self.aggregation not in ("micro", "macro"):
            raise ConfigError(f"aggregation must be micro or macro, got {self.aggregation!r}")
        if self.unparseable not in UNPARSEABLE_POLICIES:
            raise ConfigError(f"unparseable must be one of {UNPARSEABLE_POLICIES}, got {self.unparseable!r}")
        if self.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")


@dataclass(frozen=True)
class ModelExchange:
    doc_id: str
    prompt: str
    raw_response: str
    parsed: ClusterSet | None
    consistency: Consistency
    attempt_count: int = 0
    latency_s: float = 0.0
    warnings: tuple[str, ...] = ()
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "prompt": self.prompt,
            "raw_response": self.raw_response,
            "parsed": self.parsed.to_json() if self.parsed else None,
            "consistency": self.consistency.value,
            "attempt_count": self.attempt_count,
            "latency_s": self.latency_s,
            "warnings": list(self.warnings),
            "error": self.error,
        }


@dataclass
class EvaluationRun:
    exchanges: list[ModelExchange]
    report: MetricReport


def _check_documents(corpus: Sequence[AnnotatedDocument], exemplars: Sequence[AnnotatedDocument], cfg: RunConfig):
    if not exemplars:
        raise ConfigError("at least one few-shot exemplar is required")
    ex_ids = [d.doc_id for d in exemplars]
    if cfg.exemplar_ids and ex_ids != list(cfg.exemplar_ids):
        raise ConfigError(f"exemplars {ex_ids} differ from configured exemplar_ids {list(cfg.exemplar_ids)}")
    ids = [d.doc_id for d in corpus]
    if len(set(ids)) != len(ids):
        raise ConfigError("evaluation corpus contains duplicate document ids")
    shared = sorted(set(ids) & set(ex_ids))
    if shared:
        raise ConfigError(f"exemplar documents also in the evaluation set: {shared}")


def run_evaluation(
    corpus: Sequence[AnnotatedDocument],
    exemplars: Sequence[AnnotatedDocument],
    cfg: RunConfig,
    *,
    transport: httpx.BaseTransport | None = None,
    sleep: Callable[[float], None] = time.sleep,
    rng: random.Random | None = None,
) -> EvaluationRun:
    """Query the model for every evaluation document and score the replies.

    Request failures (exhausted retries, cassette misses, prompts over
    budget) are recorded on the exchange and flagged in the report; only
    configuration problems raise.  Unparseable or failed documents score as
    all-singleton predictions, or are left out when ``cfg.unparseable`` is
    ``"exclude"``.
    """
    _check_documents(corpus, exemplars, cfg)
    docs = sorted(corpus, key=lambda d: d.doc_id)
    fewshot = build_fewshot_prompt([FewShotExemplar.from_document(d) for d in exemplars])
    cassette = Cassette(cfg.model.cassette) if cfg.model.mode != "live" else None
    rng = rng or random.Random()

    def query(doc: AnnotatedDocument) -> ModelExchange:
        indexed = index_document(doc)
        try:
            prompt = build_final_prompt(fewshot, indexed, cfg.budget)
        except BudgetExceeded as exc:
            return ModelExchange(doc.doc_id, "", "", None, Consistency.UNPARSEABLE, error=f"budget_exceeded: {exc}")
        try:
            reply = complete(prompt, cfg.model, cassette=cassette, transport=transport, sleep=sleep, rng=rng)
        except (TransportError, CassetteMiss) as exc:
            attempts = getattr(exc, "attempts", 0)
            return ModelExchange(
                doc.doc_id, prompt, "", None, Consistency.UNPARSEABLE, attempts, error=f"{type(exc).__name__}: {exc}"
            )
        parsed = parse_response(reply.text, indexed.n_mentions)
        return ModelExchange(
            doc.doc_id,
            prompt,
            reply.text,
            parsed.clusters,
            parsed.consistency,
            reply.attempts,
            reply.latency_s,
            tuple(parsed.warnings),
        )

    with cassette if cfg.model.mode == "record" else nullcontext():
        with ThreadPoolExecutor(max_workers=cfg.concurrency) as pool:
            exchanges = list(pool.map(query, docs))

    records = []
    for doc, ex in zip(docs, exchanges):
        gold = build_gold_clusters(doc)
        flags: list[str] = []
        if ex.failed:
            flags.append("request_failed")
        pred = ex.parsed
        if pred is None:
            flags.append("unparseable")
            if cfg.unparseable == "singletons":
                pred = ClusterSet.singletons(gold.n_mentions)
                flags.append("singleton_fallback")
        scores = score_document(gold, pred, doc.doc_id) if pred is not None else None
        records.append(DocumentRecord(doc.doc_id, gold, pred, scores, ex.consistency.value, tuple(flags)))

    report = build_report(
        records,
        cfg.model.model,
        cfg.phi,
        cfg.aggregation,
        metadata={
            "prompt_version": PROMPT_VERSION,
            "mode": cfg.model.mode,
            "temperature": cfg.model.temperature,
            "unparseable_policy": cfg.unparseable,
            "exemplar_ids": [d.doc_id for d in exemplars],
        },
    )
    return EvaluationRun(exchanges, report)
