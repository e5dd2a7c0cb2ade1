"""End-to-end checks: analyze a flow's residual network, certify BP at the bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from . import bp, oracle
from . import residual as rs
from .errors import UsageError
from .model import GmnfInstance


@dataclass
class Analysis:
    sigma: object
    sigma_cycle: Optional[tuple]
    L: object
    T: object
    n_cycles: int
    n_paths: int
    bound: Optional[int]
    network: rs.ResidualNetwork = field(repr=False, default=None)


def analyze(instance: GmnfInstance, x) -> Analysis:
    """Residual quantities at ``x`` and the iteration bound they imply (None if sigma <= 0)."""
    net = rs.build_residual(instance, x)
    prof = rs.cost_profile(net)
    bound = None
    if prof.sigma == math.inf or prof.sigma > 0:
        bound = rs.theorem_bound(prof.L, prof.sigma, prof.T, instance.n)
    return Analysis(prof.sigma, prof.sigma_cycle, prof.L, prof.T, prof.n_cycles, prof.n_paths,
                    bound, net)


@dataclass
class Certificate:
    status: str              # "certified", "mismatch", "not-unique", "infeasible"
    x_star: Optional[list] = None
    value: object = None
    analysis: Optional[Analysis] = None
    bp_result: Optional[bp.BpResult] = None
    mismatched_edges: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "certified"


def certify(instance: GmnfInstance, convention: str = bp.BELIEF_DEFAULT,
            init: str = bp.INIT_COST, iterations: Optional[int] = None) -> Certificate:
    """Oracle optimum, uniqueness, sigma/L/T, the bound N, BP for N rounds, exact comparison.

    ``iterations`` overrides the computed bound (for experiments).
    """
    if instance.mode != "rational":
        raise UsageError("certification runs in rational mode only")
    res = oracle.solve_exact(instance)
    if res.status != oracle.OPTIMAL:
        return Certificate("infeasible")
    if not res.unique:
        return Certificate("not-unique", res.x, res.value)
    x_star = res.x
    info = analyze(instance, x_star)
    N = info.bound if iterations is None else iterations
    out = bp.run(instance, iterations=N, convention=convention, init=init)
    cert = Certificate("certified", x_star, res.value, info, out)
    if out.infeasible:
        cert.status = "mismatch"
        cert.mismatched_edges = list(out.infeasible_edges)
        return cert
    cert.mismatched_edges = [e for e in range(instance.m) if out.x[e] != x_star[e]]
    if cert.mismatched_edges:
        cert.status = "mismatch"
    return cert
