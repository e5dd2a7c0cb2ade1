"""Convex piecewise-linear functions on a closed interval.

A function is stored as its breakpoints ``((z_0, v_0), ..., (z_k, v_k))`` with
strictly increasing abscissas; it is ``+inf`` outside ``[z_0, z_k]``.  An empty
breakpoint tuple is the infeasible function (``+inf`` everywhere), which every
operation propagates instead of raising.

All operations are exact for rational data.  With floats, abscissa and
slope comparisons use :data:`gmnfbp.scalar.FLOAT_TOL`.
"""

from __future__ import annotations

import bisect
import heapq
import math
from dataclasses import dataclass

from . import scalar as sc
from .errors import SizeLimitError, UsageError, size_caps

_MAX_BREAKPOINTS = size_caps().breakpoints


@dataclass(frozen=True)
class ConvexPwl:
    points: tuple = ()

    @property
    def infeasible(self) -> bool:
        return not self.points

    @property
    def lo(self):
        return self.points[0][0]

    @property
    def hi(self):
        return self.points[-1][0]

    @property
    def domain(self):
        return (self.lo, self.hi)

    def __call__(self, z):
        return evaluate(self, z)

    def __add__(self, other: "ConvexPwl") -> "ConvexPwl":
        return add(self, other)

    def slopes(self) -> list:
        pts = self.points
        return [(pts[i + 1][1] - pts[i][1]) / (pts[i + 1][0] - pts[i][0])
                for i in range(len(pts) - 1)]

    def __repr__(self):
        if self.infeasible:
            return "ConvexPwl(infeasible)"
        body = ", ".join(f"({sc.format_scalar(z)}, {sc.format_scalar(v)})" for z, v in self.points)
        return f"ConvexPwl({body})"


INFEASIBLE = ConvexPwl(())


def _canonical(points) -> ConvexPwl:
    """Merge coincident abscissas, drop collinear points, assert convexity."""
    eq, lt = sc.eq, sc.lt
    out = []
    slopes = []  # slopes[i] joins out[i] and out[i + 1]
    for z, v in points:
        if out and eq(out[-1][0], z):
            continue
        if out:
            z0, v0 = out[-1]
            s = (v - v0) / (z - z0)
            if slopes and eq(s, slopes[-1]):
                out.pop()
                slopes.pop()
                z0, v0 = out[-1]
                s = (v - v0) / (z - z0)
            elif slopes and lt(s, slopes[-1]):
                raise AssertionError(f"non-convex result: slopes {slopes[-1]} then {s}")
            slopes.append(s)
        out.append((z, v))
    if len(out) > _MAX_BREAKPOINTS:
        raise SizeLimitError(f"{len(out)} breakpoints exceeds the cap of {_MAX_BREAKPOINTS}")
    return ConvexPwl(tuple(out))


def _check_convex(f: ConvexPwl) -> None:
    sl = f.slopes()
    for a, b in zip(sl, sl[1:]):
        if sc.lt(b, a):
            raise AssertionError(f"non-convex result: slopes {a} then {b}")


def from_points(points) -> ConvexPwl:
    """Build from ``(z, value)`` pairs; they must describe a convex function."""
    pts = sorted(points, key=lambda p: p[0])
    if not pts:
        return INFEASIBLE
    for (z0, _), (z1, _) in zip(pts, pts[1:]):
        if z0 == z1:
            raise UsageError(f"duplicate abscissa {z0}")
    return _canonical(pts)


def point_mass(z, value) -> ConvexPwl:
    return ConvexPwl(((z, value),))


def constant(lo, hi, value) -> ConvexPwl:
    if hi < lo:
        return INFEASIBLE
    if lo == hi:
        return point_mass(lo, value)
    return ConvexPwl(((lo, value), (hi, value)))


def make_edge_cost(c, u) -> ConvexPwl:
    """``z -> c*z`` on ``[0, u]``."""
    if u < 0:
        raise UsageError(f"negative capacity {u}")
    zero = u - u
    if u == 0:
        return point_mass(zero, zero)
    return ConvexPwl(((zero, zero), (u, c * u)))


def evaluate(f: ConvexPwl, z):
    """``f(z)``; ``math.inf`` outside the domain."""
    if f.infeasible:
        return math.inf
    pts = f.points
    lo, hi = pts[0][0], pts[-1][0]
    if sc.lt(z, lo) or sc.lt(hi, z):
        return math.inf
    if len(pts) == 1:
        return pts[0][1]
    z = min(max(z, lo), hi)
    xs = [p[0] for p in pts]
    i = bisect.bisect_right(xs, z) - 1
    if i >= len(pts) - 1:
        return pts[-1][1]
    (z0, v0), (z1, v1) = pts[i], pts[i + 1]
    if z == z0:
        return v0
    return v0 + (v1 - v0) * (z - z0) / (z1 - z0)


def affine_precompose(f: ConvexPwl, p, q) -> ConvexPwl:
    """``h(z) = f(p*z + q)``."""
    if p == 0:
        raise UsageError("affine_precompose needs p != 0")
    if f.infeasible:
        return INFEASIBLE
    pts = [((z - q) / p, v) for z, v in f.points]
    if p < 0:
        pts.reverse()
    return ConvexPwl(tuple(pts))


def shift(f: ConvexPwl, c) -> ConvexPwl:
    if f.infeasible:
        return INFEASIBLE
    return ConvexPwl(tuple((z, v + c) for z, v in f.points))


def add(f: ConvexPwl, g: ConvexPwl) -> ConvexPwl:
    """Pointwise sum on the intersection of the domains."""
    if f.infeasible or g.infeasible:
        return INFEASIBLE
    lo = max(f.lo, g.lo)
    hi = min(f.hi, g.hi)
    if sc.lt(hi, lo):
        return INFEASIBLE
    if hi < lo:  # float slack: collapse to a point
        hi = lo
    zs = sorted({lo, hi}.union(z for z, _ in f.points if lo < z < hi)
                .union(z for z, _ in g.points if lo < z < hi))
    return _canonical(list(zip(zs, (a + b for a, b in zip(_sample(f, zs), _sample(g, zs))))))


def _sample(f: ConvexPwl, zs) -> list:
    """Values of ``f`` at sorted abscissas inside its domain."""
    pts = f.points
    if len(pts) == 1:
        return [pts[0][1]] * len(zs)
    out = []
    i = 0
    last = len(pts) - 2
    for z in zs:
        while i < last and pts[i + 1][0] <= z:
            i += 1
        (z0, v0), (z1, v1) = pts[i], pts[i + 1]
        if z == z0:
            out.append(v0)
        elif z == z1:
            out.append(v1)
        else:
            out.append(v0 + (v1 - v0) * (z - z0) / (z1 - z0))
    return out


def subtract_linear(f: ConvexPwl, c) -> ConvexPwl:
    """``f(z) - c*z``; stays convex since the subtrahend is linear."""
    if f.infeasible:
        return INFEASIBLE
    return _canonical([(z, v - c * z) for z, v in f.points])


def segments(f: ConvexPwl) -> list:
    """``[(length, slope), ...]`` in order of increasing slope."""
    pts = f.points
    return [(pts[i + 1][0] - pts[i][0], (pts[i + 1][1] - pts[i][1]) / (pts[i + 1][0] - pts[i][0]))
            for i in range(len(pts) - 1)]


def inf_convolve(f: ConvexPwl, g: ConvexPwl) -> ConvexPwl:
    """``h(s) = min{f(x) + g(y) : x + y = s}`` by merging slope sequences."""
    if f.infeasible or g.infeasible:
        return INFEASIBLE
    z = f.lo + g.lo
    v = f.points[0][1] + g.points[0][1]
    pts = [(z, v)]
    for length, slope in heapq.merge(segments(f), segments(g), key=lambda s: s[1]):
        z = z + length
        v = v + slope * length
        pts.append((z, v))
    return _canonical(pts)


def inf_convolve_many(fs) -> ConvexPwl:
    fs = list(fs)
    if not fs:
        raise UsageError("inf_convolve_many needs at least one operand")
    if any(f.infeasible for f in fs):
        return INFEASIBLE
    z = sum((f.lo for f in fs[1:]), fs[0].lo)
    v = sum((f.points[0][1] for f in fs[1:]), fs[0].points[0][1])
    pts = [(z, v)]
    for length, slope in heapq.merge(*(segments(f) for f in fs), key=lambda s: s[1]):
        z = z + length
        v = v + slope * length
        pts.append((z, v))
    return _canonical(pts)


def split_inf_convolution(fs, s) -> list:
    """Arguments ``x_i`` with ``sum(x_i) == s`` attaining ``inf_convolve_many(fs)(s)``.

    Greedy: start every operand at its left end and spend the remaining
    budget on segments in increasing slope order (ties by operand order).
    """
    fs = list(fs)
    xs = [f.lo for f in fs]
    total = sum(xs[1:], xs[0]) if xs else 0
    budget = s - total
    if sc.lt(budget, 0):
        raise UsageError(f"{s} is left of the convolution domain")
    segs = []
    for i, f in enumerate(fs):
        segs.extend((slope, i, j, length) for j, (length, slope) in enumerate(segments(f)))
    segs.sort(key=lambda t: (t[0], t[1], t[2]))
    for slope, i, _, length in segs:
        if budget <= 0:
            break
        take = min(length, budget)
        xs[i] = xs[i] + take
        budget = budget - take
    if sc.lt(0, budget):
        raise UsageError(f"{s} is right of the convolution domain")
    return xs


def min_value(f: ConvexPwl):
    """``(minimum, (zl, zr))`` with the full closed argmin interval."""
    if f.infeasible:
        raise UsageError("infeasible function has no minimum")
    best = min(v for _, v in f.points)
    at = [z for z, v in f.points if sc.eq(v, best)]
    return best, (at[0], at[-1])


def normalize(f: ConvexPwl) -> ConvexPwl:
    if f.infeasible:
        return INFEASIBLE
    best, _ = min_value(f)
    return shift(f, -best)
