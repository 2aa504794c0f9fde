"""Indexed rendering, gold clusters and corpus statistics."""

from __future__ import annotations

import re
from collections import defaultdict
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Iterable, Sequence

from .core import AnnotatedDocument, ClusterSet, EmptyCorpus, IndexedDocument, canonicalize

INDEX_CLOSE = re.compile(r"\]#([0-9]+)")


def index_document(doc: AnnotatedDocument) -> IndexedDocument:
    """Render every mention as ``[surface]#k`` with k its tag_index.

    Nested mentions nest their brackets, e.g. ``[Mẹ của [tôi]#2]#1``.
    """
    doc.validate()
    events: list[tuple[int, int, int, str]] = []
    for m in doc.mentions:
        events.append((m.start, 1, m.depth, "["))
        events.append((m.end, 0, -m.depth, f"]#{m.tag_index}"))
    events.sort(key=lambda e: e[:3])
    out: list[str] = []
    cursor = 0
    for pos, _, _, markup in events:
        out.append(doc.plain_text[cursor:pos])
        out.append(markup)
        cursor = pos
    out.append(doc.plain_text[cursor:])
    table = tuple((m.tag_index, m.surface, m.tag_number) for m in doc.mentions)
    return IndexedDocument(doc.doc_id, "".join(out), table)


@dataclass(frozen=True)
class IndexedSpan:
    label: int  # the number after "#"
    start: int  # offsets into the stripped text
    end: int
    surface: str


def scan_indexed(text: str) -> tuple[str, list[IndexedSpan]]:
    """Strip ``[...]#k`` markup, returning the plain text and the spans.

    Spans come back in reading order (outer before inner on equal start).
    A ``]#k`` closes the most recent unmatched ``[``; brackets that never
    close are kept as text, as is any ``]`` not followed by ``#`` digits.
    Digits directly after a mention are read as part of its label.
    """
    # first pass: decide which "[" are openers
    stack: list[int] = []
    closers: dict[int, tuple[int, int, int]] = {}  # close pos -> (open pos, label, markup end)
    for m in re.finditer(r"\[|\]#([0-9]+)", text):
        if m.group(0) == "[":
            stack.append(m.start())
        elif stack:
            closers[m.start()] = (stack.pop(), int(m.group(1)), m.end())
    openers = {v[0] for v in closers.values()}

    plain: list[str] = []
    starts: dict[int, int] = {}
    spans: list[IndexedSpan] = []
    i = 0
    pos = 0
    while i < len(text):
        if i in openers:
            starts[i] = pos
            i += 1
        elif i in closers:
            open_pos, label, end = closers[i]
            s = starts[open_pos]
            spans.append(IndexedSpan(label, s, pos, "".join(plain[s:pos])))
            i = end
        else:
            plain.append(text[i])
            pos += 1
            i += 1
    spans.sort(key=lambda sp: (sp.start, -sp.end))
    return "".join(plain), spans


def parse_indexed(indexed_text: str, doc_id: str = "") -> IndexedDocument:
    """Inverse of :func:`index_document` for the mention table.

    tag_number is unknown in indexed text and is reported as 0.
    """
    _, spans = scan_indexed(indexed_text)
    return IndexedDocument(doc_id, indexed_text, tuple((sp.label, sp.surface, 0) for sp in spans))


def strip_indexed(indexed_text: str) -> str:
    return scan_indexed(indexed_text)[0]


def build_gold_clusters(doc: AnnotatedDocument) -> ClusterSet:
    groups: dict[int, list[int]] = defaultdict(list)
    for m in doc.mentions:
        groups[m.tag_number].append(m.tag_index)
    return canonicalize(groups.values(), doc.n_mentions)


@dataclass(frozen=True)
class CorpusStats:
    total: int
    avg_length: float
    avg_mentions: float
    avg_entities: float

    def as_tuple(self) -> tuple[int, float, float, float]:
        return (self.total, self.avg_length, self.avg_mentions, self.avg_entities)

    def display(self) -> tuple[str, str, str, str]:
        return (
            str(self.total),
            format_one_decimal(self.avg_length),
            format_one_decimal(self.avg_mentions),
            format_one_decimal(self.avg_entities),
        )


def count_tokens(text: str) -> int:
    return len(text.split())


def corpus_stats(docs: Sequence[AnnotatedDocument]) -> CorpusStats:
    """Document count and per-document averages of length, mentions, entities.

    Length is counted in whitespace-delimited tokens of the plain text.
    """
    if not docs:
        raise EmptyCorpus("corpus_stats needs at least one document")
    n = len(docs)
    return CorpusStats(
        total=n,
        avg_length=sum(count_tokens(d.plain_text) for d in docs) / n,
        avg_mentions=sum(d.n_mentions for d in docs) / n,
        avg_entities=sum(len({m.tag_number for m in d.mentions}) for d in docs) / n,
    )


def format_one_decimal(x: float) -> str:
    """Round half-up to one decimal; whole numbers print without a decimal."""
    q = Decimal(repr(x)).quantize(Decimal("0.1"), rounding=ROUND_HALF_UP)
    if q == q.to_integral_value():
        return str(int(q))
    return str(q)


STATS_HEADER = ("", "Total", "Average length", "Average mention", "Average entity")


def format_stats_table(rows: Iterable[tuple[str, CorpusStats]]) -> str:
    """Markdown table with one row per subset (average length in tokens)."""
    lines = ["| " + " | ".join(STATS_HEADER) + " |", "|" + "---|" * len(STATS_HEADER)]
    for label, stats in rows:
        lines.append("| " + " | ".join((label,) + stats.display()) + " |")
    return "\n".join(lines) + "\n"
