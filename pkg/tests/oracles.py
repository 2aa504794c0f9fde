"""Brute-force reference implementations used only by the tests.

Each oracle follows the textbook definition directly and shares no code
with the package's scoring path.
"""

from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction


def _complete(clusters, n):
    covered = {i for c in clusters for i in c}
    return [set(c) for c in clusters if c] + [{i} for i in range(1, n + 1) if i not in covered]


def _components(nodes, edges):
    parent = {v: v for v in nodes}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in edges:
        parent[find(a)] = find(b)
    return len({find(v) for v in nodes})


def muc_links(gold, pred, n):
    """MUC by counting spanning links.

    A key cluster needs |K|-1 links; the response supplies links between
    every pair it clusters together, and the links it gets right are
    |K| minus the connected components those pairs leave inside K.
    Returns (p_num, p_den, r_num, r_den).
    """
    gold, pred = _complete(gold, n), _complete(pred, n)

    def side(key, response):
        edges = [(a, b) for c in response for a, b in itertools.combinations(sorted(c), 2)]
        correct = total = 0
        for k in key:
            inside = [(a, b) for a, b in edges if a in k and b in k]
            correct += len(k) - _components(k, inside)
            total += len(k) - 1
        return correct, total

    r_num, r_den = side(gold, pred)
    p_num, p_den = side(pred, gold)
    return p_num, p_den, r_num, r_den


def b_cubed_loop(gold, pred, n):
    """Per-mention precision and recall averaged over mentions, as Fractions."""
    gold, pred = _complete(gold, n), _complete(pred, n)
    p = r = Fraction(0)
    for i in range(1, n + 1):
        c = next(c for c in pred if i in c)
        g = next(g for g in gold if i in g)
        p += Fraction(len(c & g), len(c))
        r += Fraction(len(c & g), len(g))
    return p / n, r / n


def phi(a, b, kind):
    inter = len(set(a) & set(b))
    if kind == "phi3":
        return Fraction(inter)
    return Fraction(2 * inter, len(a) + len(b))


def _best_injection(weights):
    """Exact best matching by dynamic programming over subsets of columns."""
    rows = len(weights)
    cols = len(weights[0]) if rows else 0
    if rows > cols:
        weights = [list(c) for c in zip(*weights)]
        rows, cols = cols, rows
    best = {0: Fraction(0)}
    for i in range(rows):
        step = {}
        for used, value in best.items():
            for j in range(cols):
                if not used >> j & 1:
                    key = used | 1 << j
                    cand = value + weights[i][j]
                    if cand > step.get(key, -1):
                        step[key] = cand
        best = step
    return max(best.values())


def ceaf_bijection(gold, pred, n, kind):
    """CEAF over the best one-to-one alignment; returns (total, p_den, r_den) as Fractions."""
    gold, pred = _complete(gold, n), _complete(pred, n)
    total = _best_injection([[phi(g, c, kind) for c in pred] for g in gold])
    p_den = sum((phi(c, c, kind) for c in pred), Fraction(0))
    r_den = sum((phi(g, g, kind) for g in gold), Fraction(0))
    return total, p_den, r_den


def assignment_exhaustive(matrix):
    """Best total over all injections of the shorter side into the longer."""
    r = len(matrix)
    c = len(matrix[0]) if r else 0
    if r == 0 or c == 0:
        return 0.0

    if r <= c:
        return max(math.fsum(matrix[i][j] for i, j in enumerate(p)) for p in itertools.permutations(range(c), r))
    return max(math.fsum(matrix[i][j] for j, i in enumerate(p)) for p in itertools.permutations(range(r), c))


def random_partition(rng: random.Random, n: int, cover: bool = True):
    """Random set partition of 1..n; with cover=False some mentions are dropped."""
    labels = [rng.randrange(max(1, n)) for _ in range(n)]
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels, start=1):
        if cover or rng.random() > 0.2:
            groups.setdefault(lab, []).append(i)
    clusters = list(groups.values())
    rng.shuffle(clusters)
    return [rng.sample(c, len(c)) for c in clusters]


def f1(p, r):
    return 2 * p * r / (p + r) if p + r else 0
