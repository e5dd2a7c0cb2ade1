"""Residual networks and the cycle/path quantities behind the convergence bound.

For a flow ``x`` every base edge ``e = (v, w)`` yields a forward arc ``v -> w``
(if ``x_e < u_e``, cost ``c_e``) and a reverse arc ``w -> v`` (if ``x_e > 0``,
cost ``-c_e``, coefficients negated).  Passing through vertex ``v`` from arc
``e1`` into arc ``e2`` scales pushed flow by ``delta(v, e1, e2) = |a_v^{e1}| / |a_v^{e2}|``.

Cycle and path costs are the delta-weighted sums of arc costs.  Simple cycles
and paths are enumerated by backtracking, so everything here is for small
graphs; the enumeration caps in :mod:`gmnfbp.errors` apply.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import scalar as sc
from .errors import SizeLimitError, UsageError, size_caps
from .model import GmnfInstance


@dataclass(frozen=True)
class Arc:
    tail: int
    head: int
    edge: int          # base edge index
    forward: bool
    cost: object
    a_tail: object     # residual coefficient at the arc's tail
    a_head: object


@dataclass
class ResidualNetwork:
    n: int
    arcs: list
    out: list = field(default_factory=list)
    mode: str = sc.RATIONAL

    def __post_init__(self):
        if not self.out:
            self.out = [[] for _ in range(self.n)]
            for i, a in enumerate(self.arcs):
                self.out[a.tail].append(i)

    def delta(self, a1: int, a2: int):
        """Scaling at the vertex where arc ``a1`` ends and arc ``a2`` starts."""
        x, y = self.arcs[a1], self.arcs[a2]
        if x.head != y.tail:
            raise UsageError(f"arc {a1} does not end where arc {a2} starts")
        return abs(x.a_head) / abs(y.a_tail)

    def find_arc(self, edge: int, forward: bool) -> int:
        for i, a in enumerate(self.arcs):
            if a.edge == edge and a.forward == forward:
                return i
        raise UsageError(f"no {'forward' if forward else 'reverse'} arc for edge {edge}")


def build_residual(instance: GmnfInstance, x) -> ResidualNetwork:
    if len(x) != instance.m:
        raise UsageError("flow length does not match the edge count")
    arcs = []
    for e, (v, w) in enumerate(instance.edges):
        xe, u = x[e], instance.capacity[e]
        if sc.lt(xe, 0) or sc.lt(u, xe):
            raise UsageError(f"flow {xe} on edge {instance.edge_ids[e]} violates [0, {u}]")
        av, aw = instance.a_tail[e], instance.a_head[e]
        if sc.lt(xe, u):
            arcs.append(Arc(v, w, e, True, instance.cost[e], av, aw))
        if sc.lt(0, xe):
            arcs.append(Arc(w, v, e, False, -instance.cost[e], -aw, -av))
    return ResidualNetwork(instance.n, arcs, mode=instance.mode)


def residual_as_instance(network: ResidualNetwork) -> GmnfInstance:
    """The residual arcs as a GMNF instance (zero balances, unit capacities) for ratio-balance checks."""
    edges = [(a.tail, a.head) for a in network.arcs]
    m = len(edges)
    one = sc.convert(1, network.mode)
    return GmnfInstance.build(network.n, edges, [a.cost for a in network.arcs], [one] * m,
                              [a.a_tail for a in network.arcs], [a.a_head for a in network.arcs],
                              [one - one] * network.n, mode=network.mode)


# ------------------------------------------------------------- costs of walks

def _check_walk(network: ResidualNetwork, arcs, closed: bool) -> None:
    if not arcs:
        raise UsageError("empty arc sequence")
    for a, b in zip(arcs, arcs[1:]):
        if network.arcs[a].head != network.arcs[b].tail:
            raise UsageError(f"arcs {a} and {b} are not consecutive")
    if closed and network.arcs[arcs[-1]].head != network.arcs[arcs[0]].tail:
        raise UsageError("arc sequence is not closed")


def _weights(network: ResidualNetwork, arcs) -> list:
    """Running products ``prod_{j=2}^{i} delta(v_j, e_{j-1}, e_j)``; the first is 1."""
    w = [sc.convert(1, network.mode)]
    for a, b in zip(arcs, arcs[1:]):
        w.append(w[-1] * network.delta(a, b))
    return w


def walk_cost(network: ResidualNetwork, arcs):
    """Closed-form ``c_1 + sum_i c_i prod_j delta`` on any directed walk."""
    _check_walk(network, arcs, closed=False)
    return sum(network.arcs[a].cost * wt for a, wt in zip(arcs, _weights(network, arcs)))


def nested_cost(network: ResidualNetwork, arcs):
    """The same quantity evaluated from the innermost term outward."""
    val = network.arcs[arcs[-1]].cost
    for i in range(len(arcs) - 2, -1, -1):
        val = network.arcs[arcs[i]].cost + network.delta(arcs[i], arcs[i + 1]) * val
    return val


def cycle_cost(network: ResidualNetwork, cycle):
    """Cost of a directed cycle given as arcs ``(e_1, ..., e_k)`` starting at ``e_1``."""
    cycle = list(cycle)
    _check_walk(network, cycle, closed=True)
    closed = walk_cost(network, cycle)
    nested = nested_cost(network, cycle)
    assert sc.eq(closed, nested), (closed, nested)
    return closed


def _check_simple_path(network: ResidualNetwork, path) -> None:
    _check_walk(network, path, closed=False)
    verts = [network.arcs[path[0]].tail] + [network.arcs[a].head for a in path]
    if len(set(verts)) != len(verts):
        raise UsageError("arc sequence repeats a vertex; not a simple path")


def path_cost(network: ResidualNetwork, path):
    path = list(path)
    _check_simple_path(network, path)
    closed = walk_cost(network, path)
    assert sc.eq(closed, nested_cost(network, path))
    return closed


def reducer(network: ResidualNetwork, path):
    """Smallest running delta product after the first arc; 1 for a single arc."""
    path = list(path)
    _check_simple_path(network, path)
    w = _weights(network, path)
    return min(w[1:]) if len(w) > 1 else w[0]


# ------------------------------------------------------------- enumeration

def _limits(max_objects):
    caps = size_caps()
    return caps.vertices, caps.objects if max_objects is None else max_objects


def simple_cycles(network: ResidualNetwork, max_objects: Optional[int] = None):
    """Yield each simple directed cycle once, rooted at its smallest vertex.

    Cycles that use both the forward and the reverse arc of one base edge are
    skipped: pushing flow around them changes nothing.
    """
    max_v, max_obj = _limits(max_objects)
    if network.n > max_v:
        raise SizeLimitError(f"{network.n} vertices exceeds the enumeration cap of {max_v}")
    count = 0
    for s in range(network.n):
        stack = []
        on_path = {s}
        used_edges = set()

        def extend(v):
            nonlocal count
            for ai in network.out[v]:
                arc = network.arcs[ai]
                if arc.edge in used_edges:
                    continue
                if arc.head == s:
                    count += 1
                    if count > max_obj:
                        raise SizeLimitError(f"more than {max_obj} cycles")
                    yield tuple(stack) + (ai,)
                elif arc.head > s and arc.head not in on_path:
                    stack.append(ai)
                    on_path.add(arc.head)
                    used_edges.add(arc.edge)
                    yield from extend(arc.head)
                    used_edges.discard(arc.edge)
                    on_path.discard(arc.head)
                    stack.pop()

        yield from extend(s)


def rotations(cycle) -> list:
    cycle = tuple(cycle)
    return [cycle[i:] + cycle[:i] for i in range(len(cycle))]


def sigma(network: ResidualNetwork, max_objects: Optional[int] = None):
    """Minimum cycle cost over every simple cycle and every starting arc.

    Returns ``(value, attaining cycle)``; ``(math.inf, None)`` without cycles.
    """
    best, arg = math.inf, None
    for cyc in simple_cycles(network, max_objects):
        for rot in rotations(cyc):
            c = cycle_cost(network, rot)
            if c < best:
                best, arg = c, rot
    return best, arg


@dataclass
class CostProfile:
    L: object        # max |path cost| over simple paths
    T: object        # min reducer over simple paths
    n_paths: int
    n_cycles: int = 0
    sigma: object = None
    sigma_cycle: tuple = None


def simple_paths(network: ResidualNetwork, max_objects: Optional[int] = None):
    """Yield ``(arcs, cost, reducer)`` for every simple directed path with >= 1 arc."""
    max_v, max_obj = _limits(max_objects)
    if network.n > max_v:
        raise SizeLimitError(f"{network.n} vertices exceeds the enumeration cap of {max_v}")
    count = 0
    one = sc.convert(1, network.mode)

    def extend(arcs, on_path, cost, weight, red):
        nonlocal count
        count += 1
        if count > max_obj:
            raise SizeLimitError(f"more than {max_obj} paths")
        yield tuple(arcs), cost, red
        last = arcs[-1]
        for ai in network.out[network.arcs[last].head]:
            arc = network.arcs[ai]
            if arc.head in on_path:
                continue
            w = weight * network.delta(last, ai)
            arcs.append(ai)
            on_path.add(arc.head)
            yield from extend(arcs, on_path, cost + arc.cost * w, w,
                              w if red is None else min(red, w))
            on_path.discard(arc.head)
            arcs.pop()

    for ai, arc in enumerate(network.arcs):
        for item in extend([ai], {arc.tail, arc.head}, arc.cost, one, None):
            arcs, cost, red = item
            yield arcs, cost, (one if red is None else red)


def cost_profile(network: ResidualNetwork, max_objects: Optional[int] = None,
                 with_sigma: bool = True) -> CostProfile:
    zero = sc.convert(0, network.mode)
    L, T, count = zero, None, 0
    for _, cost, red in simple_paths(network, max_objects):
        count += 1
        L = max(L, abs(cost))
        T = red if T is None else min(T, red)
    if T is None:
        T = sc.convert(1, network.mode)
    prof = CostProfile(L, T, count)
    if with_sigma:
        n_cyc = 0
        best, arg = math.inf, None
        for cyc in simple_cycles(network, max_objects):
            n_cyc += 1
            for rot in rotations(cyc):
                c = cycle_cost(network, rot)
                if c < best:
                    best, arg = c, rot
        prof.n_cycles, prof.sigma, prof.sigma_cycle = n_cyc, best, arg
    return prof


def theorem_bound(L, sigma_value, T, n: int) -> int:
    """Smallest integer ``N >= (L / (2 sigma T) + 1) n``."""
    if sigma_value == math.inf:
        return n
    if not sigma_value > 0:
        raise UsageError(f"sigma = {sigma_value} is not positive; the optimum is not unique")
    if not T > 0:
        raise UsageError("T must be positive")
    return math.ceil((L / (2 * sigma_value * T) + 1) * n)


# ------------------------------------------------------------- flow pushes

def _cycle_amounts(network: ResidualNetwork, cycle, m: int):
    """Net change of each base edge per unit of flow pushed into the first arc."""
    d = [0] * m
    for ai, wt in zip(cycle, _weights(network, cycle)):
        arc = network.arcs[ai]
        d[arc.edge] += wt if arc.forward else -wt
    return d


def max_push(instance: GmnfInstance, x, network: ResidualNetwork, cycle):
    """Largest amount that can enter the first arc while keeping ``0 <= x <= u``."""
    d = _cycle_amounts(network, list(cycle), instance.m)
    best = math.inf
    for e, de in enumerate(d):
        if de > 0:
            best = min(best, (instance.capacity[e] - x[e]) / de)
        elif de < 0:
            best = min(best, x[e] / -de)
    return best


def push_cycle(instance: GmnfInstance, x, network: ResidualNetwork, cycle, eps) -> list:
    """Push ``eps`` into the first arc and the delta-scaled amounts around the cycle.

    Balance is preserved exactly on a ratio-balanced graph and the objective
    moves by ``eps * cycle_cost``; both are asserted.
    """
    cycle = list(cycle)
    _check_walk(network, cycle, closed=True)
    if eps < 0:
        raise UsageError("eps must be non-negative")
    d = _cycle_amounts(network, cycle, instance.m)
    y = list(x)
    for e, de in enumerate(d):
        y[e] = x[e] + eps * de
        if sc.lt(y[e], 0) or sc.lt(instance.capacity[e], y[e]):
            raise UsageError(f"eps={eps} breaks the capacity of edge {instance.edge_ids[e]} "
                             f"(max push {max_push(instance, x, network, cycle)})")
    before = instance.residuals(x)
    after = instance.residuals(y)
    assert all(sc.eq(a, b) for a, b in zip(before, after)), "push broke a balance row"
    change = instance.objective(y) - instance.objective(x)
    assert sc.eq(change, eps * cycle_cost(network, cycle)), "cost change mismatch"
    return y


# ------------------------------------------------------------- lemma checks

def splice(network: ResidualNetwork, path, cycle) -> list:
    """Insert ``cycle`` into ``path`` at the interior vertex where the cycle starts."""
    path, cycle = list(path), list(cycle)
    _check_walk(network, cycle, closed=True)
    start = network.arcs[cycle[0]].tail
    verts = [network.arcs[a].tail for a in path] + [network.arcs[path[-1]].head]
    interior = verts[1:-1]
    if start not in interior:
        raise UsageError(f"cycle starts at {start}, not at an interior vertex of the path")
    p = verts.index(start)
    return path[:p] + cycle + path[p:]


def check_lemma2(network: ResidualNetwork, path, cycle, T) -> bool:
    """``cost(spliced walk) >= path_cost + T * cycle_cost``."""
    walk = splice(network, path, cycle)
    lhs = walk_cost(network, walk)
    rhs = path_cost(network, path) + T * cycle_cost(network, cycle)
    return sc.le(rhs, lhs)


def decompose_walk(network: ResidualNetwork, walk):
    """Split a directed walk into a simple path and the simple cycles excised from it."""
    walk = list(walk)
    _check_walk(network, walk, closed=False)
    path_arcs = []
    verts = [network.arcs[walk[0]].tail]
    pos = {verts[0]: 0}
    cycles = []
    for a in walk:
        h = network.arcs[a].head
        path_arcs.append(a)
        if h in pos:
            i = pos[h]
            cycles.append(tuple(path_arcs[i:]))
            for v in verts[i + 1:]:
                del pos[v]
            del path_arcs[i:]
            del verts[i + 1:]
        else:
            verts.append(h)
            pos[h] = len(verts) - 1
    return tuple(path_arcs), cycles
