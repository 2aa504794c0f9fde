"""MUC, B-Cubed, CEAF and CoNLL F1 over :class:`ClusterSet` pairs.

All metrics complete both partitions with singletons for uncovered mentions
before scoring, so an omitted mention counts as a clustering error rather
than a detection error.  Precision/recall are returned as :class:`PRF`
numerator-denominator pairs so corpus scores can be micro-averaged.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from statistics import fmean
from typing import Sequence

from .core import PRF, ClusterSet, CorefError, EmptyCorpus, EmptyDocument


class SimilarityKind(enum.Enum):
    PHI3 = "phi3"  # |A ∩ B|, mention-based CEAF
    PHI4 = "phi4"  # 2|A ∩ B| / (|A| + |B|), entity-based CEAF


METRICS = ("muc", "b_cubed", "ceaf_phi3", "ceaf_phi4")


def _prepare(gold: ClusterSet, pred: ClusterSet) -> tuple[ClusterSet, ClusterSet]:
    if gold.n_mentions != pred.n_mentions:
        raise CorefError(f"gold has {gold.n_mentions} mentions but prediction has {pred.n_mentions}")
    return gold.completed(), pred.completed()


def _muc_side(key: ClusterSet, response: ClusterSet) -> tuple[int, int]:
    owner = {i: k for k, c in enumerate(response.clusters) for i in c}
    num = den = 0
    for c in key.clusters:
        num += len(c) - len({owner[i] for i in c})
        den += len(c) - 1
    return num, den


def muc(gold: ClusterSet, pred: ClusterSet) -> PRF:
    """Link-based score; all-singleton sides give 0 with ``degenerate`` set."""
    gold, pred = _prepare(gold, pred)
    r_num, r_den = _muc_side(gold, pred)
    p_num, p_den = _muc_side(pred, gold)
    return PRF(p_num, p_den, r_num, r_den)


def b_cubed(gold: ClusterSet, pred: ClusterSet) -> PRF:
    gold, pred = _prepare(gold, pred)
    n = gold.n_mentions
    if n == 0:
        raise EmptyDocument("B-Cubed is undefined for a document without mentions")
    gold_sets = [set(c) for c in gold.clusters]
    p_num = r_num = 0.0
    for c in pred.clusters:
        cs = set(c)
        for g in gold_sets:
            overlap = len(cs & g)
            if overlap:
                # each of the `overlap` mentions contributes overlap/|C| and overlap/|G|
                p_num += overlap * overlap / len(cs)
                r_num += overlap * overlap / len(g)
    return PRF(p_num, n, r_num, n)


def similarity(a: Sequence[int], b: Sequence[int], kind: SimilarityKind) -> float:
    overlap = len(set(a) & set(b))
    if kind is SimilarityKind.PHI3:
        return float(overlap)
    return 2.0 * overlap / (len(a) + len(b))


@dataclass(frozen=True)
class Assignment:
    pairs: tuple[tuple[int, int], ...]
    total: float


def optimal_assignment(scores: Sequence[Sequence[float]]) -> Assignment:
    """Maximum-weight one-to-one matching of rows to columns.

    Kuhn-Munkres with row/column potentials (shortest augmenting paths),
    O(r^2 c) for r <= c; a taller matrix is transposed first.  Every row of
    the shorter side is matched.
    """
    r = len(scores)
    c = len(scores[0]) if r else 0
    if r == 0 or c == 0:
        return Assignment((), 0.0)
    transposed = r > c
    a = [list(col) for col in zip(*scores)] if transposed else [list(row) for row in scores]
    n, m = len(a), len(a[0])

    inf = math.inf
    u = [0.0] * (n + 1)
    v = [0.0] * (m + 1)
    match = [0] * (m + 1)  # match[j] = row (1-based) assigned to column j
    way = [0] * (m + 1)
    for i in range(1, n + 1):
        match[0] = i
        j0 = 0
        minv = [inf] * (m + 1)
        used = [False] * (m + 1)
        while True:
            used[j0] = True
            i0 = match[j0]
            delta = inf
            j1 = 0
            row = a[i0 - 1]
            for j in range(1, m + 1):
                if not used[j]:
                    cur = -row[j - 1] - u[i0] - v[j]
                    if cur < minv[j]:
                        minv[j] = cur
                        way[j] = j0
                    if minv[j] < delta:
                        delta = minv[j]
                        j1 = j
            for j in range(m + 1):
                if used[j]:
                    u[match[j]] += delta
                    v[j] -= delta
                else:
                    minv[j] -= delta
            j0 = j1
            if match[j0] == 0:
                break
        while j0:
            j1 = way[j0]
            match[j0] = match[j1]
            j0 = j1

    pairs = [(match[j] - 1, j - 1) for j in range(1, m + 1) if match[j]]
    if transposed:
        pairs = [(col, row) for row, col in pairs]
    pairs.sort()
    total = math.fsum(scores[i][j] for i, j in pairs)
    return Assignment(tuple(pairs), total)


def ceaf(gold: ClusterSet, pred: ClusterSet, kind: SimilarityKind = SimilarityKind.PHI3) -> PRF:
    """Score of the best one-to-one alignment between gold and predicted clusters.

    Precision divides by the predicted clusters' self-similarity and recall
    by the gold clusters' self-similarity.
    """
    gold, pred = _prepare(gold, pred)
    if gold.n_mentions == 0:
        raise EmptyDocument("CEAF is undefined for a document without mentions")
    matrix = [[similarity(g, p, kind) for p in pred.clusters] for g in gold.clusters]
    total = optimal_assignment(matrix).total
    p_den = math.fsum(similarity(p, p, kind) for p in pred.clusters)
    r_den = math.fsum(similarity(g, g, kind) for g in gold.clusters)
    return PRF(total, p_den, total, r_den)


def conll_f1(muc_f1: float, b3_f1: float, ceaf_f1: float) -> float:
    return (muc_f1 + b3_f1 + ceaf_f1) / 3


_EMPTY = PRF(0, 0, 0, 0)


@dataclass(frozen=True)
class DocumentScores:
    doc_id: str
    scores: dict[str, PRF]
    flags: tuple[str, ...] = ()

    def conll(self, phi: SimilarityKind = SimilarityKind.PHI3) -> float:
        return conll_f1(self.scores["muc"].f1, self.scores["b_cubed"].f1, self.scores[f"ceaf_{phi.value}"].f1)

    def to_dict(self, phi: SimilarityKind = SimilarityKind.PHI3) -> dict:
        return {
            "doc_id": self.doc_id,
            "flags": list(self.flags),
            "metrics": {k: self.scores[k].to_dict() for k in METRICS},
            "conll_f1": self.conll(phi),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "DocumentScores":
        return cls(
            d["doc_id"],
            {k: PRF.from_dict(d["metrics"][k]) for k in METRICS},
            tuple(d.get("flags", ())),
        )


def score_document(gold: ClusterSet, pred: ClusterSet, doc_id: str = "") -> DocumentScores:
    """All four metrics for one document.

    A document without mentions scores 0/0 everywhere and is flagged rather
    than raising, so it cannot abort a corpus run.
    """
    if gold.n_mentions == 0:
        return DocumentScores(doc_id, {k: _EMPTY for k in METRICS}, ("empty_document",))
    scores = {
        "muc": muc(gold, pred),
        "b_cubed": b_cubed(gold, pred),
        "ceaf_phi3": ceaf(gold, pred, SimilarityKind.PHI3),
        "ceaf_phi4": ceaf(gold, pred, SimilarityKind.PHI4),
    }
    flags = tuple(f"{k}_degenerate" for k in METRICS if scores[k].degenerate)
    return DocumentScores(doc_id, scores, flags)


@dataclass(frozen=True)
class MacroScore:
    precision: float
    recall: float
    f1: float

    def to_dict(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1}


@dataclass(frozen=True)
class CorpusScores:
    micro: dict[str, PRF]
    macro: dict[str, MacroScore]
    n_documents: int
    phi: SimilarityKind = SimilarityKind.PHI3
    degenerate: tuple[str, ...] = field(default=())

    @property
    def conll_micro(self) -> float:
        return conll_f1(self.micro["muc"].f1, self.micro["b_cubed"].f1, self.micro[f"ceaf_{self.phi.value}"].f1)

    @property
    def conll_macro(self) -> float:
        return conll_f1(self.macro["muc"].f1, self.macro["b_cubed"].f1, self.macro[f"ceaf_{self.phi.value}"].f1)

    def to_dict(self) -> dict:
        return {
            "n_documents": self.n_documents,
            "ceaf_phi": self.phi.value,
            "micro": {k: v.to_dict() for k, v in self.micro.items()},
            "macro": {k: v.to_dict() for k, v in self.macro.items()},
            "conll_f1": {"micro": self.conll_micro, "macro": self.conll_macro},
            "degenerate": list(self.degenerate),
        }


def aggregate_corpus(
    per_doc: Sequence[DocumentScores], phi: SimilarityKind = SimilarityKind.PHI3
) -> CorpusScores:
    """Micro (pooled numerators/denominators) and macro (mean per-document) scores.

    Documents are folded in doc_id order so the result does not depend on
    the order in which they were scored.
    """
    if not per_doc:
        raise EmptyCorpus("no documents to aggregate")
    ordered = sorted(per_doc, key=lambda d: d.doc_id)
    # mention-less documents add nothing to micro sums; keep them out of macro too
    scored = [d for d in ordered if "empty_document" not in d.flags]
    micro: dict[str, PRF] = {}
    macro: dict[str, MacroScore] = {}
    for k in METRICS:
        total = _EMPTY
        for d in ordered:
            total = total + d.scores[k]
        micro[k] = total
        if scored:
            macro[k] = MacroScore(
                fmean(d.scores[k].precision for d in scored),
                fmean(d.scores[k].recall for d in scored),
                fmean(d.scores[k].f1 for d in scored),
            )
        else:
            macro[k] = MacroScore(0.0, 0.0, 0.0)
    degenerate = tuple(k for k in METRICS if micro[k].degenerate)
    return CorpusScores(micro, macro, len(ordered), phi, degenerate)
