"""Exact ground truth for small GMNF instances by basic-solution enumeration.

The feasible set ``{x : A x = f, 0 <= x <= u}`` is a polytope, so an optimum
is attained at a vertex.  Every vertex is a basic solution: pick ``r = rank A``
columns forming a nonsingular basis, fix the remaining variables at 0 or their
capacity, and solve for the basis.  Enumerating all of them yields the full
set of optimal vertices, which also decides uniqueness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .scalar import Q
from .errors import SizeLimitError, UsageError, size_caps
from .model import GmnfInstance

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"


@dataclass
class OracleResult:
    status: str
    value: Q = None
    solutions: list = field(default_factory=list)

    @property
    def unique(self) -> bool:
        return self.status == OPTIMAL and len(self.solutions) == 1

    @property
    def x(self):
        return self.solutions[0] if self.solutions else None


def _pivot_key(q: Q):
    return (q.numerator.bit_length() + q.denominator.bit_length(),)


def row_reduce(rows, rhs, ncols):
    """Reduced row echelon form of ``[rows | rhs]`` over the rationals.

    Returns ``(reduced rows, reduced rhs, pivot columns, consistent)``; zero
    rows are dropped.  Pivots are chosen deterministically: the entry with the
    shortest bit-length in the column, first row on ties.
    """
    A = [list(r) for r in rows]
    b = list(rhs)
    pivots = []
    r = 0
    for c in range(ncols):
        cand = [i for i in range(r, len(A)) if A[i][c] != 0]
        if not cand:
            continue
        p = min(cand, key=lambda i: _pivot_key(A[i][c]))
        A[r], A[p] = A[p], A[r]
        b[r], b[p] = b[p], b[r]
        piv = A[r][c]
        if piv != 1:
            A[r] = [x / piv for x in A[r]]
            b[r] = b[r] / piv
        for i in range(len(A)):
            if i != r and A[i][c] != 0:
                k = A[i][c]
                A[i] = [x - k * y for x, y in zip(A[i], A[r])]
                b[i] = b[i] - k * b[r]
        pivots.append(c)
        r += 1
        if r == len(A):
            break
    consistent = all(bi == 0 for bi in b[r:])
    return A[:r], b[:r], pivots, consistent


def _solve_square(M, rhs_cols):
    """Solve ``M X = R`` for each column of ``R``; ``None`` when M is singular."""
    k = len(M)
    aug = [list(M[i]) + [col[i] for col in rhs_cols] for i in range(k)]
    for c in range(k):
        cand = [i for i in range(c, k) if aug[i][c] != 0]
        if not cand:
            return None
        p = min(cand, key=lambda i: _pivot_key(aug[i][c]))
        aug[c], aug[p] = aug[p], aug[c]
        piv = aug[c][c]
        aug[c] = [x / piv for x in aug[c]]
        for i in range(k):
            if i != c and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[c])]
    return [[aug[i][k + j] for i in range(k)] for j in range(len(rhs_cols))]


def solve_lp(rows, rhs, cost, capacity, max_vars=None) -> OracleResult:
    """Minimise ``cost . x`` subject to ``rows x == rhs`` and ``0 <= x <= capacity``.

    ``rows`` is a list of dense coefficient lists (length ``len(cost)``).
    Works exactly over rationals.
    """
    m = len(cost)
    cap_limit = size_caps().oracle_edges if max_vars is None else max_vars
    if m > cap_limit:
        raise SizeLimitError(f"{m} variables exceeds the oracle cap of {cap_limit}")
    rows = [[Q(x) for x in r] for r in rows]
    rhs = [Q(x) for x in rhs]
    cost = [Q(x) for x in cost]
    capacity = [Q(x) for x in capacity]
    if any(u < 0 for u in capacity):
        return OracleResult(INFEASIBLE)
    A, b, _, consistent = row_reduce(rows, rhs, m)
    if not consistent:
        return OracleResult(INFEASIBLE)
    r = len(A)

    best = None
    found = set()
    for basis in combinations(range(m), r):
        nonbasic = [j for j in range(m) if j not in basis]
        M = [[A[i][j] for j in basis] for i in range(r)]
        cols = [b] + [[A[i][j] for i in range(r)] for j in nonbasic]
        sol = _solve_square(M, cols) if r else [[]] + [[] for _ in nonbasic]
        if sol is None:
            continue
        base, effects = sol[0], sol[1:]
        ubas = [capacity[j] for j in basis]
        # depth-first over bound patterns with interval pruning on basic values
        lo_rem, hi_rem = _remaining_ranges(effects, [capacity[j] for j in nonbasic], r)
        xn = [None] * len(nonbasic)

        def dfs(k, cur):
            nonlocal best
            for i in range(r):
                if cur[i] + lo_rem[k][i] > ubas[i] or cur[i] + hi_rem[k][i] < 0:
                    return
            if k == len(nonbasic):
                x = [Q(0)] * m
                for i, j in enumerate(basis):
                    x[j] = cur[i]
                for t, j in enumerate(nonbasic):
                    x[j] = xn[t]
                key = tuple(x)
                if key in found:
                    return
                val = sum(c * xi for c, xi in zip(cost, x))
                if best is None or val < best[0]:
                    best = (val, [key])
                elif val == best[0]:
                    best[1].append(key)
                found.add(key)
                return
            u = capacity[nonbasic[k]]
            xn[k] = Q(0)
            dfs(k + 1, cur)
            if u != 0:
                xn[k] = u
                eff = effects[k]
                dfs(k + 1, [cur[i] - eff[i] * u for i in range(r)])

        dfs(0, list(base))

    if best is None:
        return OracleResult(INFEASIBLE)
    sols = sorted(best[1])
    return OracleResult(OPTIMAL, best[0], [list(s) for s in sols])


def _remaining_ranges(effects, caps, r):
    """Per depth k: min/max additive change to basic values from variables k.."""
    n = len(effects)
    lo = [[Q(0)] * r for _ in range(n + 1)]
    hi = [[Q(0)] * r for _ in range(n + 1)]
    for k in range(n - 1, -1, -1):
        for i in range(r):
            d = -effects[k][i] * caps[k]
            lo[k][i] = lo[k + 1][i] + min(d, 0)
            hi[k][i] = hi[k + 1][i] + max(d, 0)
    return lo, hi


def balance_matrix(instance: GmnfInstance):
    rows = [[Q(0)] * instance.m for _ in range(instance.n)]
    for e, (v, w) in enumerate(instance.edges):
        rows[v][e] += instance.a_tail[e]
        rows[w][e] += instance.a_head[e]
    return rows


def solve_exact(instance: GmnfInstance, max_edges=None) -> OracleResult:
    """All optimal vertices of the instance, exactly."""
    if instance.mode != "rational":
        instance = instance.with_mode("rational")
    return solve_lp(balance_matrix(instance), instance.balance, instance.cost,
                    instance.capacity, max_edges)


def is_unique(instance: GmnfInstance, max_edges=None) -> bool:
    """True iff the optimal face is a single point."""
    res = solve_exact(instance, max_edges)
    if res.status != OPTIMAL:
        raise UsageError("instance is infeasible; uniqueness is undefined")
    return res.unique
