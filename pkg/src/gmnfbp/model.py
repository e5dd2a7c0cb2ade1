"""GMNF instances, structural validation and the ratio-balance check.

An instance is a directed multigraph (no self-loops) with two coefficients
per edge: ``a_tail > 0`` at the tail and ``a_head < 0`` at the head.  The
balance rows read ``sum(a_v^e * x_e for e incident to v) == f_v``.
"""

from __future__ import annotations

import hashlib
import json
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

from . import scalar as sc
from .errors import SizeLimitError, UsageError, size_caps


@dataclass(frozen=True)
class DirectedGraph:
    n: int
    edges: tuple  # ((tail, head), ...); index is the edge identity

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))

    @property
    def m(self) -> int:
        return len(self.edges)

    @cached_property
    def incidence(self) -> tuple:
        """``incidence[v]`` lists ``(edge, is_tail)`` for every edge touching v."""
        inc = [[] for _ in range(self.n)]
        for e, (v, w) in enumerate(self.edges):
            if 0 <= v < self.n:
                inc[v].append((e, True))
            if 0 <= w < self.n and w != v:
                inc[w].append((e, False))
        return tuple(tuple(x) for x in inc)

    def incident_edges(self, v: int) -> tuple:
        return tuple(e for e, _ in self.incidence[v])

    def other_end(self, e: int, v: int) -> int:
        tail, head = self.edges[e]
        if v == tail:
            return head
        if v == head:
            return tail
        raise UsageError(f"edge {e} is not incident to vertex {v}")


@dataclass(frozen=True)
class GmnfInstance:
    graph: DirectedGraph
    cost: tuple
    capacity: tuple
    a_tail: tuple
    a_head: tuple
    balance: tuple
    edge_ids: tuple = field(default=None)
    mode: str = sc.RATIONAL

    def __post_init__(self):
        for name in ("cost", "capacity", "a_tail", "a_head", "balance"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        m = self.graph.m
        if self.edge_ids is None:
            object.__setattr__(self, "edge_ids", tuple(range(m)))
        else:
            object.__setattr__(self, "edge_ids", tuple(self.edge_ids))
        for name in ("cost", "capacity", "a_tail", "a_head", "edge_ids"):
            if len(getattr(self, name)) != m:
                raise UsageError(f"{name} has length {len(getattr(self, name))}, expected {m}")
        if len(self.balance) != self.graph.n:
            raise UsageError(f"balance has length {len(self.balance)}, expected {self.graph.n}")
        if len(set(self.edge_ids)) != m:
            raise UsageError("edge ids must be distinct")

    @classmethod
    def build(cls, n, edges, cost, capacity, a_tail, a_head, balance,
              edge_ids=None, mode=sc.RATIONAL):
        conv = lambda xs: tuple(sc.convert(x, mode) for x in xs)  # noqa: E731
        return cls(DirectedGraph(n, edges), conv(cost), conv(capacity), conv(a_tail),
                   conv(a_head), conv(balance), edge_ids, mode)

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m(self) -> int:
        return self.graph.m

    @property
    def edges(self) -> tuple:
        return self.graph.edges

    def coeff(self, v: int, e: int):
        tail, head = self.graph.edges[e]
        if v == tail:
            return self.a_tail[e]
        if v == head:
            return self.a_head[e]
        raise UsageError(f"edge {e} is not incident to vertex {v}")

    def objective(self, x) -> sc.Scalar:
        return sum((c * xe for c, xe in zip(self.cost, x)), sc.convert(0, self.mode))

    def residuals(self, x) -> list:
        """``sum(a_v^e x_e) - f_v`` per vertex."""
        out = [-f for f in self.balance]
        for e, (v, w) in enumerate(self.graph.edges):
            out[v] += self.a_tail[e] * x[e]
            out[w] += self.a_head[e] * x[e]
        return out

    def is_feasible(self, x) -> bool:
        if len(x) != self.m:
            return False
        if any(sc.lt(xe, 0) or sc.lt(u, xe) for xe, u in zip(x, self.capacity)):
            return False
        return all(sc.eq(r, 0) for r in self.residuals(x))

    def with_mode(self, mode: str) -> "GmnfInstance":
        if mode == self.mode:
            return self
        return GmnfInstance.build(self.n, self.edges, self.cost, self.capacity, self.a_tail,
                                  self.a_head, self.balance, self.edge_ids, mode)

    def replace(self, **changes) -> "GmnfInstance":
        data = dict(n=self.n, edges=self.edges, cost=self.cost, capacity=self.capacity,
                    a_tail=self.a_tail, a_head=self.a_head, balance=self.balance,
                    edge_ids=self.edge_ids, mode=self.mode)
        data.update(changes)
        return GmnfInstance.build(**data)

    def to_json(self) -> dict:
        f = sc.format_scalar
        return {
            "vertices": self.n,
            "edges": [
                {"id": self.edge_ids[e], "tail": v, "head": w, "cost": f(self.cost[e]),
                 "capacity": f(self.capacity[e]), "a_tail": f(self.a_tail[e]),
                 "a_head": f(self.a_head[e])}
                for e, (v, w) in enumerate(self.edges)
            ],
            "balance": [f(b) for b in self.balance],
        }

    def fingerprint(self) -> str:
        """Content hash of the canonical JSON form."""
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def load_instance(data: dict, mode: str = sc.RATIONAL) -> GmnfInstance:
    """Build an instance from the JSON object form, enforcing the sign convention."""
    if mode not in sc.MODES:
        raise UsageError(f"unknown numeric mode {mode!r}")
    try:
        n = int(data["vertices"])
        rows = sorted(data["edges"], key=lambda r: r["id"]) if all(
            "id" in r for r in data["edges"]) else list(data["edges"])
        edges, ids, cost, cap, at, ah = [], [], [], [], [], []
        for i, r in enumerate(rows):
            edges.append((int(r["tail"]), int(r["head"])))
            ids.append(int(r.get("id", i)))
            cost.append(sc.parse_scalar(r["cost"], mode))
            cap.append(sc.parse_scalar(r["capacity"], mode))
            at.append(sc.parse_scalar(r["a_tail"], mode))
            ah.append(sc.parse_scalar(r["a_head"], mode))
        balance = [sc.parse_scalar(b, mode) for b in data["balance"]]
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"malformed instance: {exc}") from exc
    for i, (p, q) in enumerate(zip(at, ah)):
        if not p > 0 or not q < 0:
            raise UsageError(f"edge {ids[i]}: need a_tail > 0 and a_head < 0, got {p}, {q}")
    for v, w in edges:
        if not (0 <= v < n and 0 <= w < n):
            raise UsageError(f"edge ({v}, {w}) references a vertex outside 0..{n - 1}")
    return GmnfInstance.build(n, edges, cost, cap, at, ah, balance, ids, mode)


def read_instance(path, mode: str = sc.RATIONAL) -> GmnfInstance:
    with open(path, encoding="utf-8") as fh:
        return load_instance(json.load(fh), mode)


def write_instance(instance: GmnfInstance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(instance.to_json(), fh, indent=2)
        fh.write("\n")


def delta(instance: GmnfInstance, v: int, e1: int, e2: int):
    """``|a_v^{e1}| / |a_v^{e2}|``."""
    a1 = instance.coeff(v, e1)
    a2 = instance.coeff(v, e2)
    return abs(a1) / abs(a2)


# ---------------------------------------------------------------- ratio balance

@dataclass(frozen=True)
class UndirectedCycle:
    """Vertices ``v_1..v_k`` and edges ``e_1..e_k``; ``e_i`` joins ``v_i`` and ``v_{i+1}``."""

    vertices: tuple
    edges: tuple


def cycle_product(instance: GmnfInstance, cycle: UndirectedCycle):
    """Product of ``delta(v_i, e_{i-1}, e_i)`` around the cycle (``e_0 = e_k``)."""
    k = len(cycle.edges)
    prod = sc.convert(1, instance.mode)
    for i in range(k):
        prod *= delta(instance, cycle.vertices[i], cycle.edges[i - 1], cycle.edges[i])
    return prod


@dataclass(frozen=True)
class GaugeCertificate:
    """Positive ``p_v`` and ``q_e`` with ``|a_v^e| = q_e * p_v``."""

    potentials: tuple
    weights: tuple


@dataclass
class ValidationReport:
    errors: list
    ratio_balanced: Optional[bool] = None
    certificate: Optional[GaugeCertificate] = None
    violating_cycle: Optional[UndirectedCycle] = None

    @property
    def ok(self) -> bool:
        return not self.errors and bool(self.ratio_balanced)


def structural_errors(instance: GmnfInstance) -> list:
    errs = []
    n = instance.n
    for e, (v, w) in enumerate(instance.edges):
        eid = instance.edge_ids[e]
        if not (0 <= v < n and 0 <= w < n):
            errs.append(f"edge {eid}: endpoint outside 0..{n - 1}")
            continue
        if v == w:
            errs.append(f"edge {eid}: self-loop at vertex {v}")
        if instance.a_tail[e] == 0 or instance.a_head[e] == 0:
            errs.append(f"edge {eid}: zero coefficient")
        if instance.a_tail[e] < 0:
            errs.append(f"edge {eid}: a_tail must be positive (out-arc of tail)")
        if instance.a_head[e] > 0:
            errs.append(f"edge {eid}: a_head must be negative (in-arc of head)")
        if instance.capacity[e] < 0:
            errs.append(f"edge {eid}: negative capacity")
    return errs


def validate(instance: GmnfInstance) -> ValidationReport:
    errs = structural_errors(instance)
    report = ValidationReport(errs)
    if errs:
        return report
    ok, witness = is_ratio_balanced_gauge(instance)
    report.ratio_balanced = ok
    if ok:
        report.certificate = witness
    else:
        report.violating_cycle = witness
    return report


def is_ratio_balanced_gauge(instance: GmnfInstance):
    """Ratio balance via multiplicative node potentials.

    Grow a spanning forest fixing ``p_root = 1``, ``q_e = |a_v^e| / p_v`` and
    ``p_w = |a_w^e| / q_e`` along tree edges; every non-tree edge must then
    satisfy ``|a_w^e| * p_v == |a_v^e| * p_w``.  Returns ``(True, certificate)``
    or ``(False, violating cycle)``.
    """
    n, m = instance.n, instance.m
    one = sc.convert(1, instance.mode)
    p = [None] * n
    q = [None] * m
    parent = [None] * n  # (parent vertex, edge)
    depth = [0] * n
    inc = instance.graph.incidence
    for root in range(n):
        if p[root] is not None:
            continue
        p[root] = one
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for e, _ in inc[v]:
                w = instance.graph.other_end(e, v)
                av, aw = abs(instance.coeff(v, e)), abs(instance.coeff(w, e))
                if p[w] is None:
                    q[e] = av / p[v]
                    p[w] = aw / q[e]
                    parent[w] = (v, e)
                    depth[w] = depth[v] + 1
                    queue.append(w)
                elif q[e] is None:
                    q[e] = av / p[v]
                    if not sc.eq(aw * p[v], av * p[w]):
                        return False, _tree_cycle(parent, depth, v, w, e)
    return True, GaugeCertificate(tuple(p), tuple(q))


def _tree_cycle(parent, depth, v, w, e) -> UndirectedCycle:
    # climb from both ends to the lowest common ancestor
    up_v, up_v_e = [v], []
    up_w, up_w_e = [w], []
    a, b = v, w
    while a != b:
        if depth[a] >= depth[b]:
            a, pe = parent[a]
            up_v.append(a)
            up_v_e.append(pe)
        else:
            b, pe = parent[b]
            up_w.append(b)
            up_w_e.append(pe)
    # w .. lca .. v, closed by e
    verts = up_w + up_v[-2::-1]
    edges = up_w_e + up_v_e[::-1] + [e]
    return UndirectedCycle(tuple(verts), tuple(edges))


def is_ratio_balanced_bruteforce(instance: GmnfInstance, max_vertices: Optional[int] = None):
    """Check the cycle product on every simple non-directed cycle by backtracking.

    Returns ``(True, None)`` or ``(False, first violating cycle)``.  Intended as a
    cross-check for small graphs only.
    """
    caps = size_caps()
    limit = caps.vertices if max_vertices is None else max_vertices
    if instance.n > limit:
        raise SizeLimitError(f"{instance.n} vertices exceeds the enumeration cap of {limit}")
    one = sc.convert(1, instance.mode)
    for cycle in undirected_cycles(instance.graph, caps.objects):
        if not sc.eq(cycle_product(instance, cycle), one):
            return False, cycle
    return True, None


def undirected_cycles(graph: DirectedGraph, max_objects: int = 10**6):
    """Yield every simple cycle of the underlying undirected multigraph once.

    Each cycle is rooted at its smallest vertex and reported in one of its two
    orientations.  Parallel edges give 2-cycles.
    """
    inc = graph.incidence
    count = 0
    for s in range(graph.n):
        verts = [s]
        used_e = []
        on_path = {s}

        def extend(v):
            nonlocal count
            for e, _ in inc[v]:
                if used_e and e == used_e[-1]:
                    continue
                w = graph.other_end(e, v)
                if w == s and len(used_e) >= 1:
                    # close; orientation dedupe by comparing first and last edge
                    if len(used_e) == 1 and e <= used_e[0]:
                        continue
                    if len(used_e) >= 2 and used_e[0] > e:
                        continue
                    count += 1
                    if count > max_objects:
                        raise SizeLimitError(f"more than {max_objects} cycles")
                    yield UndirectedCycle(tuple(verts), tuple(used_e) + (e,))
                elif w > s and w not in on_path:
                    verts.append(w)
                    used_e.append(e)
                    on_path.add(w)
                    yield from extend(w)
                    on_path.discard(w)
                    used_e.pop()
                    verts.pop()

        yield from extend(s)
