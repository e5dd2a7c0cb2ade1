"""Small hand-built instances and the random corpora shared by the tests."""

from __future__ import annotations

import random

from gmnfbp import pwl
from gmnfbp.generate import UNIT_GAUGE, generate_instance, random_connected_graph
from gmnfbp.model import GmnfInstance
from gmnfbp.scalar import Q


def make(n, edges, cost, cap, a_tail, a_head, balance, mode="rational") -> GmnfInstance:
    return GmnfInstance.build(n, edges, [Q(c) for c in cost], [Q(u) for u in cap],
                              [Q(a) for a in a_tail], [Q(a) for a in a_head],
                              [Q(f) for f in balance], mode=mode)


def single_edge(cost=5, cap=2) -> GmnfInstance:
    """One edge v -> w with unit coefficients; the balance forces x = 1."""
    return make(2, [(0, 1)], [cost], [cap], [1], [-1], [1, -1])


def path_example() -> GmnfInstance:
    """v1 -> v2 -> v3 with a gain of 2 on the first edge; forced flow (1, 2)."""
    return make(3, [(0, 1), (1, 2)], [3, -1], [2, 3], [1, 1], [-2, -1], [1, 0, -2])


def triangle(a_head_first=-1) -> GmnfInstance:
    return make(3, [(0, 1), (1, 2), (2, 0)], [1, 1, 1], [1, 1, 1], [1, 1, 1],
                [a_head_first, -1, -1], [0, 0, 0])


def corpus_params(count, seed=2024, n_range=(3, 7), m_max=12):
    """The ``(n, m, seed)`` triples of the standard random corpus."""
    rng = random.Random(seed)
    out = []
    for k in range(count):
        n = rng.randint(*n_range)
        m = rng.randint(n, min(m_max, n * (n - 1)))
        out.append((n, m, 1000 + k))
    return out


def corpus(count, seed=2024, n_range=(3, 7), m_max=12, **kw) -> list:
    return [generate_instance(n, m, seed=s, **kw)
            for n, m, s in corpus_params(count, seed, n_range, m_max)]


def unit_corpus(count, seed=77, **kw) -> list:
    return corpus(count, seed=seed, gauge_values=UNIT_GAUGE, **kw)


def acyclic_corpus(count, seed=99) -> list:
    rng = random.Random(seed)
    out = []
    for k in range(count):
        n = rng.randint(3, 8)
        out.append(generate_instance(n, n - 1, seed=5000 + k, acyclic=True))
    return out


def integer_unit_instance(seed, n, m, cap_hi=3) -> GmnfInstance:
    """Unit coefficients, integer capacities, costs and balances (an ordinary min-cost flow)."""
    rng = random.Random(seed)
    edges = random_connected_graph(rng, n, m)
    cap = [rng.randint(1, cap_hi) for _ in edges]
    flow = [rng.randint(0, u) for u in cap]
    bal = [0] * n
    for (v, w), x in zip(edges, flow):
        bal[v] += x
        bal[w] -= x
    cost = [rng.randint(-3, 5) for _ in edges]
    return make(n, edges, cost, cap, [1] * m, [-1] * m, bal)


def random_convex(rng: random.Random, max_segments=5, exact=True, grid=16):
    """Random convex function with breakpoints on multiples of 1/grid."""
    k = rng.randint(0, max_segments)
    z = Q(rng.randint(-2 * grid, 2 * grid), grid)
    v = Q(rng.randint(-20, 20), 4)
    slopes = sorted(Q(rng.randint(-12, 12), 4) for _ in range(k))
    pts = [(z, v)]
    for s in slopes:
        length = Q(rng.randint(1, grid), grid)
        z, v = z + length, v + s * length
        pts.append((z, v))
    if not exact:
        pts = [(float(a), float(b)) for a, b in pts]
    return pwl.from_points(pts)
