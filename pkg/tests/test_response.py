import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from vicoref.core import canonicalize
from vicoref.harness import Consistency, normalize_clusters, parse_response

CLEAN, RECOVERED, UNPARSEABLE = Consistency.CLEAN, Consistency.RECOVERED, Consistency.UNPARSEABLE


@pytest.mark.parametrize(
    "raw, n, clusters, consistency",
    [
        ("[(1, 5), (2, 3, 6), (4, 7)]", 7, [[1, 5], [2, 3, 6], [4, 7]], CLEAN),
        ("[[1,5],[2,3,6],[4,7]]", 7, [[1, 5], [2, 3, 6], [4, 7]], CLEAN),
        ("  [(1,), (2,)]\n", 2, [[1], [2]], CLEAN),
        ("Sure! Here is the result: [(1,2)] Hope it helps.", 2, [[1, 2]], RECOVERED),
        ("Here you go:\n[(1, 2)]\nDone.", 2, [[1, 2]], RECOVERED),
        ("```\n[(1, 2), (3,)]\n```", 3, [[1, 2], [3]], RECOVERED),
        ("{M1 [Em]#1} gặp {M2 [bạn]#2}. {M1 [Em]#3} vui.", 3, [[1, 3], [2]], RECOVERED),
        ("{M1 Em} gặp {M2 bạn}. {M1 Em} vui.", 3, [[1, 3], [2]], RECOVERED),
        ("[Em]#1 gặp [bạn]#2. [Em]#1 vui.", 3, [[1, 3], [2]], RECOVERED),
    ],
)
def test_parse_examples(raw, n, clusters, consistency):
    parsed = parse_response(raw, n)
    assert parsed.consistency is consistency
    assert parsed.clusters.to_json() == clusters


@pytest.mark.parametrize("raw", ["", "complete nonsense", "I cannot help with that.", "[(a, b)]"])
def test_unparseable(raw):
    parsed = parse_response(raw, 3)
    assert parsed.consistency is UNPARSEABLE and parsed.clusters is None


def test_empty_list_is_well_formed():
    parsed = parse_response("[]", 0)
    assert parsed.consistency is CLEAN and parsed.clusters.clusters == ()
    # with mentions, every index is completed as a singleton
    parsed = parse_response("[]", 2)
    assert parsed.consistency is CLEAN and parsed.clusters.to_json() == [[1], [2]]


def test_repairs_are_reported():
    parsed = parse_response("[(1, 2), (2, 9)]", 3)
    assert parsed.consistency is CLEAN
    assert parsed.clusters.to_json() == [[1, 2], [3]]
    assert len(parsed.warnings) == 3


def test_normalize_keeps_first_cluster_for_duplicates():
    cs, warnings = normalize_clusters([[3, 1], [1, 2]], 3)
    assert cs.to_json() == [[1, 3], [2]]
    assert warnings == ["index 1 listed more than once; kept in its first cluster"]


@settings(max_examples=300)
@given(st.integers(0, 12), st.integers(0, 2**32))
def test_serialized_clusters_parse_clean(n, seed):
    cs = canonicalize(oracles.random_partition(random.Random(seed), n), n)
    assert parse_response(cs.serialize(), n) == (cs, CLEAN, [])
