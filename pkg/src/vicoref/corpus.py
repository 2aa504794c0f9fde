"""Reading and writing corpus directories.

A corpus directory holds one UTF-8 SACR file per document, ``<doc_id>.txt``.
Derived files written next to them (``*.indexed.txt``) are skipped on read.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .core import AnnotatedDocument, ClusterSet, CorefError, canonicalize, validate_gold
from .sacr import ParseMode, ParseWarning, SacrParseOptions, parse_sacr

DERIVED_SUFFIXES = (".indexed.txt",)


class CorpusError(CorefError):
    """A file could not be read or parsed; the message names the path."""


@dataclass
class LoadedDocument:
    path: Path
    doc: AnnotatedDocument
    warnings: list[ParseWarning] = field(default_factory=list)


def load_document(path: str | Path, strict: bool = False) -> LoadedDocument:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise CorpusError(f"{path}: {exc}") from exc
    warnings: list[ParseWarning] = []
    opts = SacrParseOptions(ParseMode.STRICT if strict else ParseMode.LENIENT)
    try:
        doc = parse_sacr(text, opts, doc_id=path.stem, warnings=warnings)
    except CorefError as exc:
        raise CorpusError(f"{path}: {exc}") from exc
    return LoadedDocument(path, doc, warnings)


def corpus_files(directory: str | Path) -> list[Path]:
    directory = Path(directory)
    if not directory.is_dir():
        raise CorpusError(f"{directory}: not a directory")
    return sorted(p for p in directory.glob("*.txt") if not p.name.endswith(DERIVED_SUFFIXES))


def load_corpus(directory: str | Path, strict: bool = False) -> list[LoadedDocument]:
    return [load_document(p, strict) for p in corpus_files(directory)]


def doc_id_for(path: Path) -> str:
    name = path.name
    for suffix in (".gold.json", ".pred.json", ".json"):
        if name.endswith(suffix):
            return name[: -len(suffix)]
    return path.stem


def read_clusters(path: Path, n_mentions: int | None = None) -> ClusterSet:
    """Read a ``[[1,5],[2,3,6],[4,7]]`` file.

    Without ``n_mentions`` the file is taken as a gold cover of 1..max index.
    """
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
        if not isinstance(raw, list) or not all(isinstance(c, list) for c in raw):
            raise ValueError("expected a list of lists of integers")
        n = n_mentions if n_mentions is not None else max((i for c in raw for i in c), default=0)
        cs = canonicalize(raw, n)
    except (OSError, ValueError, TypeError, CorefError) as exc:
        raise CorpusError(f"{path}: {exc}") from exc
    if n_mentions is None and validate_gold(cs):
        missing = [f.tag_index for f in validate_gold(cs)]
        raise CorpusError(f"{path}: gold clusters leave mentions {missing} uncovered")
    return cs


def write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
