"""Domain types shared across the toolkit.

Mentions are addressed two ways: ``tag_number`` is the entity label written by
the annotator, ``tag_index`` is the 1-based reading-order position used in
indexed prompts and cluster sets.  Character offsets are in code points.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable


class CorefError(Exception):
    """Base class for all toolkit errors."""


class OverlapError(CorefError):
    pass


class RangeError(CorefError):
    pass


class InvariantError(CorefError):
    pass


class EmptyDocument(CorefError):
    pass


class EmptyCorpus(CorefError):
    pass


@dataclass(frozen=True)
class Mention:
    tag_number: int
    tag_index: int
    start: int
    end: int
    surface: str
    depth: int = 0
    parent: int | None = None  # tag_index of the enclosing mention

    @property
    def span(self) -> tuple[int, int]:
        return (self.start, self.end)

    def contains(self, other: "Mention") -> bool:
        """Strict containment of spans (equal spans do not count)."""
        return (
            self.start <= other.start
            and other.end <= self.end
            and (self.start, self.end) != (other.start, other.end)
        )


def _span_order(span: tuple[int, int]) -> tuple[int, int]:
    # ascending start, outer (longer) mention first on ties
    return (span[0], -span[1])


@dataclass(frozen=True)
class AnnotatedDocument:
    doc_id: str
    plain_text: str
    mentions: tuple[Mention, ...] = ()

    @classmethod
    def from_spans(
        cls,
        doc_id: str,
        plain_text: str,
        spans: Iterable[tuple[int, int, int]],
    ) -> "AnnotatedDocument":
        """Build a document from ``(start, end, tag_number)`` triples.

        Assigns tag_index, depth and parent.  Raises InvariantError when two
        spans partially overlap, coincide, or fall outside the text.
        """
        ordered = sorted(spans, key=lambda s: _span_order((s[0], s[1])))
        mentions: list[Mention] = []
        stack: list[Mention] = []
        for idx, (start, end, tag) in enumerate(ordered, start=1):
            if not 0 <= start < end <= len(plain_text):
                raise InvariantError(f"span ({start}, {end}) outside text of length {len(plain_text)}")
            if tag < 1:
                raise InvariantError(f"tag_number must be >= 1, got {tag}")
            while stack and stack[-1].end <= start:
                stack.pop()
            parent = stack[-1] if stack else None
            if parent is not None:
                if end > parent.end:
                    raise InvariantError(
                        f"span ({start}, {end}) partially overlaps ({parent.start}, {parent.end})"
                    )
                if (start, end) == parent.span:
                    raise InvariantError(f"duplicate span ({start}, {end})")
            mention = Mention(
                tag_number=tag,
                tag_index=idx,
                start=start,
                end=end,
                surface=plain_text[start:end],
                depth=len(stack),
                parent=parent.tag_index if parent else None,
            )
            mentions.append(mention)
            stack.append(mention)
        return cls(doc_id, plain_text, tuple(mentions))

    @property
    def n_mentions(self) -> int:
        return len(self.mentions)

    def validate(self) -> None:
        """Raise InvariantError unless every documented invariant holds."""
        rebuilt = AnnotatedDocument.from_spans(
            self.doc_id,
            self.plain_text,
            [(m.start, m.end, m.tag_number) for m in self.mentions],
        )
        if rebuilt.mentions != self.mentions:
            raise InvariantError(f"{self.doc_id}: mentions are not in canonical form")


@dataclass(frozen=True)
class IndexedDocument:
    doc_id: str
    indexed_text: str
    mention_table: tuple[tuple[int, str, int], ...] = ()

    @property
    def n_mentions(self) -> int:
        return len(self.mention_table)


@dataclass(frozen=True)
class ClusterSet:
    """Disjoint clusters of tag_index values, in canonical order."""

    clusters: tuple[tuple[int, ...], ...]
    n_mentions: int

    def to_json(self) -> list[list[int]]:
        return [list(c) for c in self.clusters]

    def serialize(self) -> str:
        """Compact JSON rendering, e.g. ``[[1,5],[2,3,6],[4,7]]``."""
        return "[" + ",".join("[" + ",".join(map(str, c)) + "]" for c in self.clusters) + "]"

    def covered(self) -> set[int]:
        return {i for c in self.clusters for i in c}

    def completed(self) -> "ClusterSet":
        """Add a singleton for every index in 1..n_mentions not yet covered."""
        covered = self.covered()
        missing = [(i,) for i in range(1, self.n_mentions + 1) if i not in covered]
        if not missing:
            return self
        return canonicalize(list(self.clusters) + missing, self.n_mentions)

    def cluster_of(self) -> dict[int, tuple[int, ...]]:
        return {i: c for c in self.clusters for i in c}

    @classmethod
    def singletons(cls, n: int) -> "ClusterSet":
        return cls(tuple((i,) for i in range(1, n + 1)), n)


def canonicalize(clusters: Iterable[Iterable[int]], n: int) -> ClusterSet:
    """Sort, drop empty clusters and check disjointness and range."""
    if n < 0:
        raise RangeError(f"mention count must be >= 0, got {n}")
    seen: set[int] = set()
    out = []
    for raw in clusters:
        raw = list(raw)
        for i in raw:
            if not isinstance(i, int) or isinstance(i, bool) or not 1 <= i <= n:
                raise RangeError(f"index {i!r} outside 1..{n}")
        members = sorted(set(raw))
        if len(members) != len(raw):
            raise OverlapError(f"index repeated inside cluster {raw}")
        for i in members:
            if i in seen:
                raise OverlapError(f"index {i} occurs in more than one cluster")
            seen.add(i)
        if members:
            out.append(tuple(members))
    out.sort(key=lambda c: c[0])
    return ClusterSet(tuple(out), n)


@dataclass(frozen=True)
class Finding:
    code: str
    message: str
    tag_index: int | None = None

    def __str__(self) -> str:
        where = f" at tag_index {self.tag_index}" if self.tag_index is not None else ""
        return f"{self.code}{where}: {self.message}"


def validate_gold(cs: ClusterSet) -> list[Finding]:
    covered = cs.covered()
    return [
        Finding("UNCOVERED", f"mention {i} belongs to no cluster", i)
        for i in range(1, cs.n_mentions + 1)
        if i not in covered
    ]


@dataclass(frozen=True)
class PRF:
    """Precision/recall/F1 kept as numerator-denominator pairs.

    A zero denominator yields 0 for that side and sets ``degenerate``.
    """

    p_num: float
    p_den: float
    r_num: float
    r_den: float
    degenerate: bool = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "degenerate", self.p_den == 0 or self.r_den == 0)

    @property
    def precision(self) -> float:
        return self.p_num / self.p_den if self.p_den else 0.0

    @property
    def recall(self) -> float:
        return self.r_num / self.r_den if self.r_den else 0.0

    @property
    def f1(self) -> float:
        return harmonic_mean(self.precision, self.recall)

    def __add__(self, other: "PRF") -> "PRF":
        return PRF(
            self.p_num + other.p_num,
            self.p_den + other.p_den,
            self.r_num + other.r_num,
            self.r_den + other.r_den,
        )

    def to_dict(self) -> dict:
        return {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "p_num": self.p_num,
            "p_den": self.p_den,
            "r_num": self.r_num,
            "r_den": self.r_den,
            "degenerate": self.degenerate,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PRF":
        return cls(d["p_num"], d["p_den"], d["r_num"], d["r_den"])


def harmonic_mean(p: float, r: float) -> float:
    return 2 * p * r / (p + r) if p + r else 0.0


class ConfigError(CorefError):
    """Invalid run configuration; the CLI maps it to exit status 2."""
