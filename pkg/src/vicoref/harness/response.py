"""Turn raw model replies into cluster sets.

Replies are tried in order of decreasing strictness:

1. the whole reply is a cluster list such as ``[(1, 5), (2, 3, 6)]``  -> CLEAN
2. a cluster list appears somewhere inside surrounding chatter        -> RECOVERED
3. the reply is an annotated text (``{M1 ...}`` or ``[...]#k``) and the
   clusters are rebuilt from its tags                                  -> RECOVERED
4. nothing usable                                                      -> UNPARSEABLE
"""

from __future__ import annotations

import enum
import re
from collections import defaultdict
from typing import Iterable, NamedTuple

from ..core import ClusterSet, canonicalize
from ..sacr import parse_sacr
from ..transform import scan_indexed

_INT = r"\s*[0-9]+\s*"
_TUPLE_BODY = rf"(?:{_INT}(?:,{_INT})*,?\s*)?"
_TUPLE = rf"(?:\({_TUPLE_BODY}\)|\[{_TUPLE_BODY}\])"
_LIST = rf"\[\s*(?:{_TUPLE}\s*(?:,\s*{_TUPLE}\s*)*,?\s*)?\]"
CLUSTER_LIST = re.compile(_LIST)
_TUPLE_RE = re.compile(_TUPLE)

SACR_TAG = re.compile(r"\{M[0-9]+\s")
INDEX_TAG = re.compile(r"\]#[0-9]+")
_INDEXED_SURFACE = re.compile(r"^\s*\[.*\]#([0-9]+)\s*$", re.DOTALL)


class Consistency(str, enum.Enum):
    CLEAN = "CLEAN"
    RECOVERED = "RECOVERED"
    UNPARSEABLE = "UNPARSEABLE"


class ParsedResponse(NamedTuple):
    clusters: ClusterSet | None
    consistency: Consistency
    warnings: list[str]


def _read_list(text: str) -> list[list[int]]:
    return [[int(x) for x in re.findall(r"[0-9]+", t.group(0))] for t in _TUPLE_RE.finditer(text[1:-1])]


def _scan_list(text: str) -> list[list[int]] | None:
    for m in CLUSTER_LIST.finditer(text):
        if re.search(r"[0-9]", m.group(0)):
            return _read_list(m.group(0))
    return None


def _from_annotated_text(text: str) -> list[list[int]] | None:
    """Rebuild clusters from a reply that annotates the text instead of listing clusters.

    With ``{M<tag> ...}`` markup the tag is the entity; the mention index is
    the ``#k`` of an indexed surface when present, otherwise the mention's
    reading-order position.  With only ``[...]#k`` markup the number after
    ``#`` is taken as the entity label and mentions are numbered in reading
    order (an echoed input thus yields singletons).
    """
    groups: dict[int, list[int]] = defaultdict(list)
    if SACR_TAG.search(text):
        doc = parse_sacr(text)
        if not doc.mentions:
            return None
        for m in doc.mentions:
            hit = _INDEXED_SURFACE.match(m.surface)
            groups[m.tag_number].append(int(hit.group(1)) if hit else m.tag_index)
    elif INDEX_TAG.search(text):
        _, spans = scan_indexed(text)
        if not spans:
            return None
        for pos, sp in enumerate(spans, start=1):
            groups[sp.label].append(pos)
    else:
        return None
    return [groups[k] for k in sorted(groups)]


def normalize_clusters(raw: Iterable[Iterable[int]], n_mentions: int) -> tuple[ClusterSet, list[str]]:
    """Force raw clusters into a valid cover of 1..n_mentions.

    Out-of-range indices are dropped, an index listed in several clusters
    stays in the first one, and uncovered indices become singletons.  Each
    repair adds a warning.
    """
    warnings: list[str] = []
    seen: set[int] = set()
    kept: list[list[int]] = []
    for cluster in raw:
        members: list[int] = []
        for i in cluster:
            if not 1 <= i <= n_mentions:
                warnings.append(f"index {i} outside 1..{n_mentions} dropped")
            elif i in seen:
                warnings.append(f"index {i} listed more than once; kept in its first cluster")
            else:
                seen.add(i)
                members.append(i)
        kept.append(members)
    for i in range(1, n_mentions + 1):
        if i not in seen:
            warnings.append(f"index {i} missing; added as singleton")
            kept.append([i])
    return canonicalize(kept, n_mentions), warnings


def parse_response(raw: str, n_mentions: int) -> ParsedResponse:
    body = raw.strip()
    if CLUSTER_LIST.fullmatch(body):
        consistency = Consistency.CLEAN
        clusters = _read_list(body)
    else:
        consistency = Consistency.RECOVERED
        clusters = _scan_list(body)
        if clusters is None:
            clusters = _from_annotated_text(body)
        if clusters is None:
            return ParsedResponse(None, Consistency.UNPARSEABLE, [])
    cs, warnings = normalize_clusters(clusters, n_mentions)
    return ParsedResponse(cs, consistency, warnings)
