"""Coreference evaluation toolkit for SACR-annotated corpora and LLM predictions."""

from .core import (
    PRF,
    AnnotatedDocument,
    ClusterSet,
    ConfigError,
    CorefError,
    EmptyCorpus,
    EmptyDocument,
    Finding,
    IndexedDocument,
    InvariantError,
    Mention,
    OverlapError,
    RangeError,
    canonicalize,
    validate_gold,
)
from .metrics import (
    SimilarityKind,
    aggregate_corpus,
    b_cubed,
    ceaf,
    conll_f1,
    muc,
    optimal_assignment,
    score_document,
)
from .sacr import ParseMode, SacrParseOptions, lint_guidelines, parse_sacr, serialize_sacr
from .transform import build_gold_clusters, corpus_stats, index_document, parse_indexed

__version__ = "0.1.0"

__all__ = [
    "PRF",
    "AnnotatedDocument",
    "ClusterSet",
    "ConfigError",
    "CorefError",
    "EmptyCorpus",
    "EmptyDocument",
    "Finding",
    "IndexedDocument",
    "InvariantError",
    "Mention",
    "OverlapError",
    "RangeError",
    "canonicalize",
    "validate_gold",
    "SimilarityKind",
    "aggregate_corpus",
    "b_cubed",
    "ceaf",
    "conll_f1",
    "muc",
    "optimal_assignment",
    "score_document",
    "ParseMode",
    "SacrParseOptions",
    "lint_guidelines",
    "parse_sacr",
    "serialize_sacr",
    "build_gold_clusters",
    "corpus_stats",
    "index_document",
    "parse_indexed",
]
