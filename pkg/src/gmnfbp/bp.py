"""Synchronous min-sum belief propagation for GMNF.

Every edge ``e = (v, w)`` carries two messages: ``m_{e->v}`` (index 0, toward
the tail) and ``m_{e->w}`` (index 1, toward the head).  The message toward one
endpoint is the edge's own cost plus the cheapest way to satisfy the balance
row at the other endpoint using the previous messages of the other incident
edges.  Messages are exact convex piecewise-linear functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import pwl
from . import scalar as sc
from .errors import UsageError
from .model import GmnfInstance
from .pwl import ConvexPwl

TAIL, HEAD = 0, 1

#: initial messages: zero on the edge's box, or the edge cost itself
INIT_ZERO = "zero"
INIT_COST = "cost"

BELIEF_DEFAULT = "default"
BELIEF_LITERAL = "literal"

TIE_RULES = ("midpoint", "lower", "upper")


@dataclass(frozen=True)
class MessageState:
    t: int
    messages: tuple  # messages[e] == (toward tail, toward head)

    def message(self, e: int, side: int) -> ConvexPwl:
        return self.messages[e][side]


@dataclass
class BpResult:
    x: Optional[list]
    iterations: int
    converged: bool
    ties: list = field(default_factory=list)
    infeasible: bool = False
    infeasible_edges: list = field(default_factory=list)
    argmin: list = field(default_factory=list)


def edge_cost_function(instance: GmnfInstance, e: int) -> ConvexPwl:
    return pwl.make_edge_cost(instance.cost[e], instance.capacity[e])


def initial_state(instance: GmnfInstance, init: str = INIT_ZERO) -> MessageState:
    msgs = []
    for e in range(instance.m):
        if init == INIT_ZERO:
            zero = sc.convert(0, instance.mode)
            m0 = pwl.constant(zero, instance.capacity[e], zero)
        elif init == INIT_COST:
            m0 = pwl.normalize(edge_cost_function(instance, e))
        else:
            raise UsageError(f"unknown message initialisation {init!r}")
        msgs.append((m0, m0))
    return MessageState(0, tuple(msgs))


def balance_message(incoming, a_e, f_far, phi: ConvexPwl, normalize: bool = True) -> ConvexPwl:
    """Cost-to-go of an edge seen through the balance row of its far endpoint.

    ``incoming`` lists ``(function, coefficient)`` for the other edges at the
    far endpoint, ``a_e`` is this edge's coefficient there and ``f_far`` the
    balance.  Each function is reparametrised by its signed contribution
    ``s = a * z``, all are inf-convolved, ``s = f_far - a_e * z`` is
    substituted and ``phi`` is added.
    """
    if any(fn.infeasible for fn, _ in incoming):
        return pwl.INFEASIBLE
    if incoming:
        acc = pwl.inf_convolve_many(pwl.affine_precompose(fn, 1 / a, 0) for fn, a in incoming)
    else:
        zero = f_far - f_far
        acc = pwl.point_mass(zero, zero)
    h = pwl.affine_precompose(acc, -a_e, f_far)
    out = pwl.add(h, phi)
    if normalize and not out.infeasible:
        out = pwl.normalize(out)
    return out


def update_message(instance: GmnfInstance, state: MessageState, e: int, toward: int,
                   normalize: bool = True) -> ConvexPwl:
    """New message for edge ``e`` toward endpoint ``toward`` (TAIL or HEAD)."""
    tail, head = instance.edges[e]
    far = head if toward == TAIL else tail
    incoming = []
    for e2, is_tail in instance.graph.incidence[far]:
        if e2 == e:
            continue
        a = instance.a_tail[e2] if is_tail else instance.a_head[e2]
        incoming.append((state.messages[e2][TAIL if is_tail else HEAD], a))
    a_e = instance.a_head[e] if toward == TAIL else instance.a_tail[e]
    return balance_message(incoming, a_e, instance.balance[far],
                           edge_cost_function(instance, e), normalize)


def iterate(instance: GmnfInstance, state: MessageState, order=None,
            normalize: bool = True) -> MessageState:
    """One synchronous round; every update reads only ``state``."""
    slots = [[None, None] for _ in range(instance.m)]
    if order is None:
        order = [(e, side) for e in range(instance.m) for side in (TAIL, HEAD)]
    for e, side in order:
        slots[e][side] = update_message(instance, state, e, side, normalize)
    if any(s is None for pair in slots for s in pair):
        raise UsageError("update order must cover every (edge, side) pair")
    return MessageState(state.t + 1, tuple((a, b) for a, b in slots))


def beliefs(instance: GmnfInstance, state: MessageState, convention: str = BELIEF_DEFAULT) -> list:
    """Per-edge belief.

    ``default`` counts the edge cost once (each message already contains it):
    ``m_{e->v} + m_{e->w} - phi_e``.  ``literal`` adds ``phi_e`` on top of both
    messages instead.
    """
    if state.t < 1:
        raise UsageError("beliefs need at least one iteration (t >= 1)")
    out = []
    for e in range(instance.m):
        m_t, m_h = state.messages[e]
        b = pwl.add(m_t, m_h)
        if convention == BELIEF_DEFAULT:
            b = pwl.subtract_linear(b, instance.cost[e])
        elif convention == BELIEF_LITERAL:
            b = pwl.add(b, edge_cost_function(instance, e))
        else:
            raise UsageError(f"unknown belief convention {convention!r}")
        out.append(b)
    return out


def decode(belief_fns: list, tie_rule: str = "midpoint", iterations: int = 0) -> BpResult:
    if tie_rule not in TIE_RULES:
        raise UsageError(f"tie rule must be one of {TIE_RULES}")
    bad = [e for e, b in enumerate(belief_fns) if b.infeasible]
    if bad:
        return BpResult(None, iterations, False, infeasible=True, infeasible_edges=bad)
    x, ties, intervals = [], [], []
    for e, b in enumerate(belief_fns):
        _, (zl, zr) = pwl.min_value(b)
        intervals.append((zl, zr))
        if sc.lt(zl, zr):
            ties.append(e)
        if tie_rule == "lower":
            x.append(zl)
        elif tie_rule == "upper":
            x.append(zr)
        else:
            x.append((zl + zr) / 2)
    return BpResult(x, iterations, True, ties, argmin=intervals)


def run(instance: GmnfInstance, iterations: Optional[int] = None, window: Optional[int] = None,
        max_iterations: int = 1000, convention: str = BELIEF_DEFAULT,
        tie_rule: str = "midpoint", init: str = INIT_COST, normalize: bool = True,
        callback=None, skip_cycles: bool = True) -> BpResult:
    """Run BP.

    With ``iterations`` set, run exactly that many rounds (``converged`` then
    only reports feasibility).  Otherwise stop once the decoded flow has been
    unchanged for ``window`` consecutive rounds (default ``n``), giving up
    after ``max_iterations`` with ``converged=False``.

    A round is a deterministic function of the previous (normalized) state, so
    in fixed mode a repeated state means the sequence is periodic from there
    on; ``skip_cycles`` then jumps straight to the state of round
    ``iterations``.  The result is identical to running every round.
    """
    state = initial_state(instance, init)
    if iterations is not None:
        if iterations < 1:
            raise UsageError("need at least one iteration")
        state = advance(instance, state, iterations, normalize, callback,
                        skip_cycles and normalize and callback is None)
        res = decode(beliefs(instance, state, convention), tie_rule, state.t)
        res.converged = not res.infeasible
        return res

    window = instance.n if window is None else window
    last = None
    stable = 0
    res = None
    while state.t < max_iterations:
        state = iterate(instance, state, normalize=normalize)
        if callback:
            callback(state)
        res = decode(beliefs(instance, state, convention), tie_rule, state.t)
        if res.infeasible:
            return res
        if last is not None and all(sc.eq(a, b) for a, b in zip(res.x, last)):
            stable += 1
        else:
            stable = 0
        last = res.x
        if stable >= window:
            res.converged = True
            return res
    if res is None:
        raise UsageError("max_iterations must be positive")
    res.converged = False
    return res


def advance(instance: GmnfInstance, state: MessageState, rounds: int, normalize: bool = True,
            callback=None, skip_cycles: bool = False) -> MessageState:
    """Apply ``rounds`` synchronous rounds to ``state``."""
    target = state.t + rounds
    seen = {state.messages: state.t} if skip_cycles else None
    history = [state.messages]
    start = state.t
    while state.t < target:
        state = iterate(instance, state, normalize=normalize)
        if callback:
            callback(state)
        if seen is None:
            continue
        first = seen.get(state.messages)
        if first is not None:
            period = state.t - first
            msgs = history[first - start + (target - state.t) % period]
            return MessageState(target, msgs)
        seen[state.messages] = state.t
        history.append(state.messages)
    return state
