"""Random ratio-balanced, feasible GMNF instances.

Coefficients come from a gauge ``|a_v^e| = q_e * p_v`` (ratio balance holds by
construction) and balances from an interior flow (feasibility holds by
construction).  Costs get a small random perturbation until the oracle
certifies a unique optimum.
"""

from __future__ import annotations

import random

from .scalar import Q
from .errors import GenerationError, UsageError
from .model import GmnfInstance
from . import oracle

DEFAULT_GAUGE = (Q(1), Q(2))
UNIT_GAUGE = (Q(1),)


def random_connected_graph(rng: random.Random, n: int, m: int, acyclic: bool = False) -> list:
    """Random spanning tree plus extra arcs; no duplicate ordered pairs."""
    if n < 1:
        raise UsageError("need at least one vertex")
    if m < n - 1:
        raise UsageError(f"m={m} < n-1={n - 1} cannot be connected")
    if acyclic and m != n - 1:
        raise UsageError("an acyclic connected graph has exactly n-1 edges")
    if m > n * (n - 1):
        raise UsageError(f"m={m} exceeds the {n * (n - 1)} available ordered pairs")
    order = list(range(n))
    rng.shuffle(order)
    edges = []
    seen = set()
    for i in range(1, n):
        v = order[i]
        w = order[rng.randrange(i)]
        pair = (v, w) if rng.random() < 0.5 else (w, v)
        edges.append(pair)
        seen.add(pair)
    while len(edges) < m:
        v, w = rng.sample(range(n), 2)
        if (v, w) in seen:
            continue
        edges.append((v, w))
        seen.add((v, w))
    rng.shuffle(edges)
    return edges


def generate_instance(n: int, m: int, capacity_range=(1, 4), cost_range=(-2, 4), seed=0, *,
                      unique: bool = True, gauge_values=DEFAULT_GAUGE, acyclic: bool = False,
                      perturbation: Q = Q(1), retries: int = 30,
                      max_oracle_edges=None) -> GmnfInstance:
    """Deterministic in ``seed``.

    Capacities are integers drawn from ``capacity_range``; base costs are
    integers from ``cost_range``.  With ``unique`` the costs receive an extra
    random multiple of ``perturbation`` (in ``[-perturbation, perturbation]``)
    and are resampled until :func:`gmnfbp.oracle.is_unique` holds.
    """
    cap_lo, cap_hi = capacity_range
    cost_lo, cost_hi = cost_range
    if cap_lo < 1 or cap_hi < cap_lo or cost_hi < cost_lo:
        raise UsageError("empty or non-positive capacity range, or empty cost range")
    rng = random.Random(seed)
    edges = random_connected_graph(rng, n, m, acyclic)
    p = [rng.choice(gauge_values) for _ in range(n)]
    q = [rng.choice(gauge_values) for _ in range(m)]
    a_tail = [q[e] * p[v] for e, (v, _) in enumerate(edges)]
    a_head = [-q[e] * p[w] for e, (_, w) in enumerate(edges)]
    cap = [Q(rng.randint(cap_lo, cap_hi)) for _ in range(m)]
    # interior point on a quarter grid, strictly inside (0, u)
    flow = [Q(rng.randint(1, 4 * int(u) - 1), 4) for u in cap]
    balance = [Q(0)] * n
    for e, (v, w) in enumerate(edges):
        balance[v] += a_tail[e] * flow[e]
        balance[w] += a_head[e] * flow[e]
    base_cost = [Q(rng.randint(cost_lo, cost_hi)) for _ in range(m)]

    def make(cost):
        return GmnfInstance.build(n, edges, cost, cap, a_tail, a_head, balance)

    if not unique:
        return make(base_cost)
    for _ in range(retries):
        cost = [c + perturbation * rng.randint(-4, 4) / 4 for c in base_cost]
        inst = make(cost)
        if oracle.is_unique(inst, max_oracle_edges):
            return inst
    raise GenerationError(f"no unique optimum after {retries} cost perturbations (seed {seed})")
