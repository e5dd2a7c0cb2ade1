"""Computation trees rooted at an edge, their induced problems, and an exact tree solver.

The depth-``N`` tree unrolls the graph around a root edge: both root endpoints
sit on level 0, and every node on level ``k < N`` receives one child per
incident base edge other than the edge leading back to its parent.  The
induced problem imposes balance rows only on nodes of level ``< N``.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from typing import Optional

from . import bp, pwl
from . import scalar as sc
from .errors import SizeLimitError, UsageError, size_caps
from .model import GmnfInstance


@dataclass
class ComputationTree:
    root_edge: int
    depth: int
    node_vertex: list = field(default_factory=list)   # Gamma on nodes
    node_level: list = field(default_factory=list)
    node_parent_edge: list = field(default_factory=list)  # tree edge toward the root, None at level 0
    edges: list = field(default_factory=list)          # (tail node, head node)
    edge_base: list = field(default_factory=list)      # Gamma on edges
    children: list = field(default_factory=list)       # node -> tree edges away from the root

    @property
    def size(self) -> int:
        return len(self.node_vertex)

    def other_end(self, te: int, node: int) -> int:
        t, h = self.edges[te]
        return h if node == t else t

    def incident(self, node: int) -> list:
        pe = self.node_parent_edge[node]
        out = [] if pe is None else [pe]
        if self.node_level[node] == 0:
            out.append(0)
        return out + self.children[node]

    def dump(self, instance: Optional[GmnfInstance] = None) -> str:
        """Indented text rendering, one line per node."""
        lines = []

        def name(e):
            return instance.edge_ids[e] if instance is not None else e

        def walk(node, indent):
            for te in self.children[node]:
                child = self.other_end(te, node)
                arrow = "->" if self.edges[te][0] == node else "<-"
                lines.append(f"{'  ' * indent}{arrow} v{self.node_vertex[child]} "
                             f"[edge {name(self.edge_base[te])}, level {self.node_level[child]}]")
                walk(child, indent + 1)

        t, h = self.edges[0]
        lines.append(f"root edge {name(self.root_edge)}: v{self.node_vertex[t]} -> "
                     f"v{self.node_vertex[h]} (depth {self.depth})")
        for node in (t, h):
            lines.append(f"v{self.node_vertex[node]} [level 0]")
            walk(node, 1)
        return "\n".join(lines)


def build_tree(instance: GmnfInstance, e: int, depth: int, max_nodes: Optional[int] = None) -> ComputationTree:
    if depth < 0:
        raise UsageError("depth must be non-negative")
    if not 0 <= e < instance.m:
        raise UsageError(f"no edge with index {e}")
    cap = size_caps().tree_nodes if max_nodes is None else max_nodes
    tree = ComputationTree(e, depth)

    def add_node(v, level, parent_edge):
        if tree.size >= cap:
            raise SizeLimitError(f"computation tree exceeds {cap} nodes")
        tree.node_vertex.append(v)
        tree.node_level.append(level)
        tree.node_parent_edge.append(parent_edge)
        tree.children.append([])
        return tree.size - 1

    v, w = instance.edges[e]
    nv = add_node(v, 0, None)
    nw = add_node(w, 0, None)
    tree.edges.append((nv, nw))
    tree.edge_base.append(e)
    frontier = [(nv, e), (nw, e)]
    for level in range(depth):
        nxt = []
        for node, came_by in frontier:
            u = tree.node_vertex[node]
            for e2, is_tail in sorted(instance.graph.incidence[u]):
                if e2 == came_by:
                    continue
                other = instance.graph.other_end(e2, u)
                child = add_node(other, level + 1, len(tree.edges))
                tree.edges.append((node, child) if is_tail else (child, node))
                tree.edge_base.append(e2)
                tree.children[node].append(len(tree.edges) - 1)
                nxt.append((child, e2))
        frontier = nxt
    return tree


@dataclass
class TreeProblem:
    """The induced GMNF on a computation tree: balance rows only on levels below the depth."""

    tree: ComputationTree
    cost: list
    capacity: list
    constrained: list          # nodes carrying a balance row
    balance: dict              # node -> f
    coeff: dict                # (node, tree edge) -> a

    @property
    def m(self) -> int:
        return len(self.cost)

    def rows(self):
        rows, rhs = [], []
        for node in self.constrained:
            r = [sc.Q(0)] * self.m
            for te in self.tree.incident(node):
                r[te] += self.coeff[(node, te)]
            rows.append(r)
            rhs.append(self.balance[node])
        return rows, rhs

    def is_feasible(self, y) -> bool:
        if any(sc.lt(yi, 0) or sc.lt(u, yi) for yi, u in zip(y, self.capacity)):
            return False
        rows, rhs = self.rows()
        return all(sc.eq(sum(a * yi for a, yi in zip(r, y)), f) for r, f in zip(rows, rhs))

    def objective(self, y):
        return sum(c * yi for c, yi in zip(self.cost, y))


def induced_problem(tree: ComputationTree, instance: GmnfInstance) -> TreeProblem:
    cost = [instance.cost[b] for b in tree.edge_base]
    cap = [instance.capacity[b] for b in tree.edge_base]
    coeff = {}
    for te, (t, h) in enumerate(tree.edges):
        b = tree.edge_base[te]
        coeff[(t, te)] = instance.a_tail[b]
        coeff[(h, te)] = instance.a_head[b]
    constrained = [i for i in range(tree.size) if tree.node_level[i] < tree.depth]
    balance = {i: instance.balance[tree.node_vertex[i]] for i in constrained}
    return TreeProblem(tree, cost, cap, constrained, balance, coeff)


@dataclass
class TreeSolution:
    feasible: bool
    value: object = None
    flow: list = None
    root_interval: tuple = None
    root_belief: pwl.ConvexPwl = None


def solve_tree(problem: TreeProblem) -> TreeSolution:
    """Exact optimum by leaf-to-root value functions and root-to-leaf extraction."""
    tree = problem.tree
    limit = max(sys.getrecursionlimit(), 4 * tree.size + 100)
    sys.setrecursionlimit(limit)
    phi = [pwl.make_edge_cost(c, u) for c, u in zip(problem.cost, problem.capacity)]
    constrained = set(problem.constrained)
    # value[(te, far)] = min cost of te plus everything beyond its endpoint `far`
    value = {}

    def cost_to_go(te, far):
        key = (te, far)
        if key in value:
            return value[key]
        if far in constrained:
            incoming = [(cost_to_go(c, tree.other_end(c, far)), problem.coeff[(far, c)])
                        for c in tree.incident(far) if c != te]
            fn = bp.balance_message(incoming, problem.coeff[(far, te)], problem.balance[far],
                                    phi[te], normalize=False)
        else:
            fn = phi[te]
        value[key] = fn
        return fn

    t, h = tree.edges[0]
    toward_t = cost_to_go(0, h)   # beyond the head
    toward_h = cost_to_go(0, t)   # beyond the tail
    belief = pwl.subtract_linear(pwl.add(toward_t, toward_h), problem.cost[0])
    if belief.infeasible:
        return TreeSolution(False)
    best, interval = pwl.min_value(belief)

    flow = [None] * problem.m
    flow[0] = interval[0]

    def extract(te, far):
        if far not in constrained:
            return
        others = [c for c in tree.incident(far) if c != te]
        if not others:
            return
        fns = []
        for c in others:
            a = problem.coeff[(far, c)]
            fns.append(pwl.affine_precompose(cost_to_go(c, tree.other_end(c, far)), 1 / a, 0))
        target = problem.balance[far] - problem.coeff[(far, te)] * flow[te]
        parts = pwl.split_inf_convolution(fns, target)
        for c, s in zip(others, parts):
            flow[c] = s / problem.coeff[(far, c)]
            extract(c, tree.other_end(c, far))

    extract(0, h)
    extract(0, t)
    return TreeSolution(True, best, flow, interval, belief)


@dataclass
class Lemma3Check:
    edge: int
    depth: int
    bp_value: object
    interval: tuple
    holds: bool


def check_lemma3(instance: GmnfInstance, e: int, depth: int, init: str = bp.INIT_COST,
                 tie_rule: str = "midpoint", bp_result: Optional[bp.BpResult] = None,
                 convention: str = bp.BELIEF_DEFAULT) -> Lemma3Check:
    """Does BP's decoded value on ``e`` after ``depth`` rounds lie in the root argmin of the tree problem?"""
    if depth < 1:
        raise UsageError("BP needs at least one iteration")
    if bp_result is None:
        bp_result = bp.run(instance, iterations=depth, init=init, tie_rule=tie_rule,
                           convention=convention)
    sol = solve_tree(induced_problem(build_tree(instance, e, depth), instance))
    if bp_result.infeasible or not sol.feasible:
        same = bp_result.infeasible and not sol.feasible
        return Lemma3Check(e, depth, None, sol.root_interval, same)
    xe = bp_result.x[e]
    lo, hi = sol.root_interval
    return Lemma3Check(e, depth, xe, (lo, hi), sc.le(lo, xe) and sc.le(xe, hi))


def lemma3_table(instance: GmnfInstance, edges=None, depths=range(1, 6), init: str = bp.INIT_COST,
                 tie_rule: str = "midpoint", convention: str = bp.BELIEF_DEFAULT) -> list:
    """``check_lemma3`` over a grid, running BP once up to the largest depth."""
    edges = list(range(instance.m)) if edges is None else list(edges)
    depths = sorted(set(depths))
    decoded = {}

    def grab(state):
        if state.t in depths:
            decoded[state.t] = bp.decode(bp.beliefs(instance, state, convention), tie_rule, state.t)

    bp.run(instance, iterations=depths[-1], init=init, tie_rule=tie_rule, callback=grab)
    return [check_lemma3(instance, e, d, init, tie_rule, decoded[d], convention)
            for d in depths for e in edges]
