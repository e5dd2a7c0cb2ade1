"""Command-line interface: ``gmnf <command> ...``.

Exit codes: 0 ok, 1 usage error (bad arguments, malformed input, failed
precondition), 2 infeasible instance, 3 BP did not converge or a check
failed, 4 a size cap was hit.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, field

from . import bp, oracle
from . import scalar as sc
from . import tree as tr
from .pipeline import analyze, certify
from .errors import GenerationError, GmnfError, SizeLimitError, UsageError
from .generate import DEFAULT_GAUGE, UNIT_GAUGE, generate_instance
from .model import (GmnfInstance, is_ratio_balanced_bruteforce, read_instance, validate,
                    write_instance)

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_FAILED, EXIT_SIZE = 0, 1, 2, 3, 4


def _plain(value):
    """JSON-ready copy: rationals as int or "p/q", infinities as strings."""
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return sc.format_scalar(value)


@dataclass
class RunReport:
    command: str
    fingerprint: str
    mode: str
    payload: dict = field(default_factory=dict)
    wall_time: float = 0.0
    text_lines: list = field(default_factory=list)   # extra human-readable detail

    def to_json(self) -> str:
        return json.dumps({"command": self.command, "instance": self.fingerprint,
                           "mode": self.mode, "result": _plain(self.payload),
                           "wall_time": round(self.wall_time, 6)}, indent=2)

    def to_text(self) -> str:
        lines = [f"command: {self.command}", f"instance: {self.fingerprint}", f"mode: {self.mode}"]
        for key, value in _plain(self.payload).items():
            if key in ("checks", "messages", "trees"):
                continue   # rendered through text_lines
            lines.append(f"{key}: {_render(value)}")
        lines.extend(self.text_lines)
        lines.append(f"wall time: {self.wall_time:.3f} s")
        return "\n".join(lines)


def _render(value) -> str:
    if isinstance(value, list):
        return "[" + ", ".join(_render(v) for v in value) + "]"
    if isinstance(value, dict):
        return "{" + ", ".join(f"{k}: {_render(v)}" for k, v in value.items()) + "}"
    if value is None:
        return "-"
    return str(value)


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad arguments; route that to exit code 1 instead."""

    def error(self, message):
        raise UsageError(message)


# ------------------------------------------------------------------ commands

def _edge_index(instance: GmnfInstance, edge_id: int) -> int:
    try:
        return instance.edge_ids.index(edge_id)
    except ValueError:
        raise UsageError(f"no edge with id {edge_id}") from None


def cmd_validate(args) -> tuple:
    inst = read_instance(args.instance)
    rep = validate(inst)
    payload = {"valid": not rep.errors, "errors": rep.errors, "ratio_balanced": rep.ratio_balanced}
    if rep.certificate is not None:
        payload["potentials"] = list(rep.certificate.potentials)
    if rep.violating_cycle is not None:
        cyc = rep.violating_cycle
        payload["violating_cycle"] = {"vertices": list(cyc.vertices),
                                      "edges": [inst.edge_ids[e] for e in cyc.edges]}
    if args.bruteforce and not rep.errors:
        brute, _ = is_ratio_balanced_bruteforce(inst)
        payload["bruteforce_ratio_balanced"] = brute
        if brute != rep.ratio_balanced:
            raise AssertionError("gauge and brute-force ratio-balance checks disagree")
    code = EXIT_OK if rep.ok else EXIT_USAGE
    return RunReport("validate", inst.fingerprint(), inst.mode, payload), code


def cmd_generate(args) -> tuple:
    gauge = UNIT_GAUGE if args.unit else DEFAULT_GAUGE
    m = args.n - 1 if args.acyclic and args.m is None else args.m
    if m is None:
        raise UsageError("--m is required unless --acyclic is given")
    inst = generate_instance(args.n, m, tuple(args.capacity), tuple(args.cost), args.seed,
                             unique=args.unique, gauge_values=gauge, acyclic=args.acyclic)
    if args.output == "-":
        json.dump(inst.to_json(), sys.stdout, indent=2)
        sys.stdout.write("\n")
        return None, EXIT_OK
    write_instance(inst, args.output)
    payload = {"output": args.output, "vertices": inst.n, "edges": inst.m, "seed": args.seed,
               "unique": args.unique}
    return RunReport("generate", inst.fingerprint(), inst.mode, payload), EXIT_OK


def _bp_payload(inst: GmnfInstance, res: bp.BpResult) -> dict:
    out = {"iterations": res.iterations, "converged": res.converged, "infeasible": res.infeasible}
    if res.infeasible:
        out["infeasible_edges"] = [inst.edge_ids[e] for e in res.infeasible_edges]
        return out
    out.update(x=res.x, objective=inst.objective(res.x), feasible=inst.is_feasible(res.x),
               ties=[inst.edge_ids[e] for e in res.ties])
    return out


def cmd_solve(args) -> tuple:
    if args.numeric == sc.FLOAT and args.method != "bp":
        raise UsageError("float mode is only available for --method bp")
    inst = read_instance(args.instance, args.numeric)
    # hash the exact form so a report identifies its input file in either mode
    fp = read_instance(args.instance).fingerprint() if inst.mode == sc.FLOAT else inst.fingerprint()
    payload = {}
    code = EXIT_OK
    lines = []
    res = ora = None
    if args.method in ("bp", "both"):
        captured = []
        hook = captured.append if args.dump_messages else None
        res = bp.run(inst, iterations=args.iterations, window=args.window,
                     max_iterations=args.max_iterations, convention=args.belief_convention,
                     tie_rule=args.tie, init=args.init, callback=hook)
        payload["bp"] = _bp_payload(inst, res)
        if res.infeasible:
            code = EXIT_INFEASIBLE
        elif not res.converged:
            code = EXIT_FAILED
        if captured:
            last = captured[-1]
            dump = {str(inst.edge_ids[e]): {"to_tail": repr(last.messages[e][0]),
                                            "to_head": repr(last.messages[e][1])}
                    for e in range(inst.m)}
            payload["messages"] = dump
            lines.append(f"messages after round {last.t}:")
            for eid, pair in dump.items():
                lines.append(f"  edge {eid} -> tail: {pair['to_tail']}")
                lines.append(f"  edge {eid} -> head: {pair['to_head']}")
    if args.method in ("oracle", "both"):
        ora = oracle.solve_exact(inst)
        if ora.status != oracle.OPTIMAL:
            payload["oracle"] = {"status": ora.status}
            code = EXIT_INFEASIBLE
        else:
            payload["oracle"] = {"status": ora.status, "x": ora.x, "objective": ora.value,
                                 "unique": ora.unique, "optimal_vertices": len(ora.solutions)}
    if args.method == "both" and res is not None and not res.infeasible and ora.x is not None:
        dev = [abs(a - b) for a, b in zip(res.x, ora.x)]
        payload["agreement"] = [sc.eq(d, 0) for d in dev]
        payload["max_deviation"] = max(dev) if dev else 0
    return RunReport("solve", fp, inst.mode, payload, text_lines=lines), code


def _read_flow(path: str):
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict):
        data = data.get("x")
    if not isinstance(data, list):
        raise UsageError("flow file must hold a list or an object with key 'x'")
    try:
        return [sc.parse_scalar(v) for v in data]
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"malformed flow: {exc}") from exc


def _analysis_payload(inst: GmnfInstance, info) -> dict:
    cyc = None
    if info.sigma_cycle is not None:
        net = info.network
        cyc = [{"edge": inst.edge_ids[net.arcs[a].edge],
                "direction": "forward" if net.arcs[a].forward else "reverse"}
               for a in info.sigma_cycle]
    return {"sigma": info.sigma, "L": info.L, "T": info.T, "bound_N": info.bound,
            "cycles": info.n_cycles, "paths": info.n_paths, "sigma_cycle": cyc}


def cmd_analyze(args) -> tuple:
    inst = read_instance(args.instance)
    if args.oracle:
        ora = oracle.solve_exact(inst)
        if ora.status != oracle.OPTIMAL:
            return RunReport("analyze", inst.fingerprint(), inst.mode,
                             {"status": ora.status}), EXIT_INFEASIBLE
        if not ora.unique:
            raise UsageError(f"the optimum is not unique ({len(ora.solutions)} optimal vertices); "
                             "sigma <= 0 and no iteration bound exists")
        x = ora.x
    else:
        x = _read_flow(args.flow)
        if len(x) != inst.m or not inst.is_feasible(x):
            raise UsageError("the given flow is not feasible for this instance")
    info = analyze(inst, x)
    payload = {"x": x, **_analysis_payload(inst, info)}
    if info.bound is None:
        raise UsageError(f"sigma = {sc.format_scalar(info.sigma)} is not positive: "
                         "the flow is not a unique optimum, so no iteration bound exists")
    return RunReport("analyze", inst.fingerprint(), inst.mode, payload), EXIT_OK


def _parse_depths(text: str) -> list:
    try:
        if "-" in text:
            lo, hi = text.split("-", 1)
            depths = list(range(int(lo), int(hi) + 1))
        else:
            depths = [int(text)]
    except ValueError:
        raise UsageError(f"bad depth {text!r}; use N or A-B") from None
    if not depths or min(depths) < 1:
        raise UsageError("depths must be >= 1")
    return depths


def cmd_tree_check(args) -> tuple:
    inst = read_instance(args.instance)
    edges = list(range(inst.m)) if args.edge == "all" else [_edge_index(inst, int(args.edge))]
    depths = _parse_depths(args.depth)
    rows = tr.lemma3_table(inst, edges, depths, init=args.init, tie_rule=args.tie)
    table = [{"edge": inst.edge_ids[r.edge], "depth": r.depth, "bp": r.bp_value,
              "interval": list(r.interval) if r.interval else None, "holds": r.holds}
             for r in rows]
    failures = sum(not r.holds for r in rows)
    lines = [f"{'edge':>5} {'N':>3}  {'bp':>10}  {'argmin interval':<22} ok"]
    for row in _plain(table):
        iv = "-" if row["interval"] is None else f"[{row['interval'][0]}, {row['interval'][1]}]"
        lines.append(f"{row['edge']:>5} {row['depth']:>3}  {_render(row['bp']):>10}  {iv:<22} "
                     f"{'yes' if row['holds'] else 'NO'}")
    payload = {"checks": table, "failures": failures}
    if args.dump_tree:
        dumps = {str(inst.edge_ids[e]): tr.build_tree(inst, e, max(depths)).dump(inst)
                 for e in edges}
        payload["trees"] = dumps
        for text in dumps.values():
            lines.append(text)
    code = EXIT_OK if failures == 0 else EXIT_FAILED
    return RunReport("tree-check", inst.fingerprint(), inst.mode, payload, text_lines=lines), code


def cmd_certify(args) -> tuple:
    inst = read_instance(args.instance)
    cert = certify(inst, convention=args.belief_convention, init=args.init)
    payload = {"status": cert.status}
    if cert.x_star is not None:
        payload.update(x_star=cert.x_star, objective=cert.value)
    if cert.analysis is not None:
        payload.update(_analysis_payload(inst, cert.analysis))
    if cert.bp_result is not None:
        payload["bp"] = _bp_payload(inst, cert.bp_result)
        payload["mismatched_edges"] = [inst.edge_ids[e] for e in cert.mismatched_edges]
    code = {"certified": EXIT_OK, "infeasible": EXIT_INFEASIBLE,
            "not-unique": EXIT_USAGE, "mismatch": EXIT_FAILED}[cert.status]
    return RunReport("certify", inst.fingerprint(), inst.mode, payload), code


# ------------------------------------------------------------------ parser

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report")

    p = _Parser(prog="gmnf", description="Belief propagation for generalized min-cost network flow.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("validate", parents=[common], help="structural and ratio-balance checks")
    s.add_argument("instance")
    s.add_argument("--bruteforce", action="store_true",
                   help="cross-check ratio balance by enumerating every cycle")
    s.set_defaults(func=cmd_validate)

    s = sub.add_parser("generate", parents=[common], help="write a random instance")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--m", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--capacity", type=int, nargs=2, default=(1, 4), metavar=("LO", "HI"))
    s.add_argument("--cost", type=int, nargs=2, default=(-2, 4), metavar=("LO", "HI"))
    s.add_argument("--unique", dest="unique", action="store_true", default=True,
                   help="perturb costs until the optimum is unique (default)")
    s.add_argument("--no-unique", dest="unique", action="store_false")
    s.add_argument("--unit", action="store_true", help="all coefficients +-1")
    s.add_argument("--acyclic", action="store_true", help="a spanning tree (m = n - 1)")
    s.add_argument("-o", "--output", default="-")
    s.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", parents=[common], help="run BP and/or the exact oracle")
    s.add_argument("instance")
    s.add_argument("--method", choices=("bp", "oracle", "both"), default="bp")
    it = s.add_mutually_exclusive_group()
    it.add_argument("--iterations", type=int, help="run exactly N rounds")
    it.add_argument("--auto", action="store_true",
                    help="stop once the decoded flow is stable (default)")
    s.add_argument("--window", type=int, help="stability window for --auto (default n)")
    s.add_argument("--max-iterations", type=int, default=1000)
    _bp_options(s)
    s.add_argument("--tie", choices=bp.TIE_RULES, default="midpoint")
    s.add_argument("--numeric", choices=sc.MODES, default=sc.RATIONAL)
    s.add_argument("--dump-messages", action="store_true")
    s.set_defaults(func=cmd_solve)

    s = sub.add_parser("analyze", parents=[common], help="residual sigma, L, T and the bound N")
    s.add_argument("instance")
    src = s.add_mutually_exclusive_group(required=True)
    src.add_argument("--flow", help="JSON file with the flow")
    src.add_argument("--oracle", action="store_true", help="use the exact optimum")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("tree-check", parents=[common], help="BP against computation-tree optima")
    s.add_argument("instance")
    s.add_argument("--edge", default="all", help="edge id or 'all'")
    s.add_argument("--depth", default="1-5", help="N or A-B")
    s.add_argument("--init", choices=(bp.INIT_COST, bp.INIT_ZERO), default=bp.INIT_COST)
    s.add_argument("--tie", choices=bp.TIE_RULES, default="midpoint")
    s.add_argument("--dump-tree", action="store_true")
    s.set_defaults(func=cmd_tree_check)

    s = sub.add_parser("certify", parents=[common], help="oracle, bound N, BP for N rounds, compare")
    s.add_argument("instance")
    _bp_options(s)
    s.set_defaults(func=cmd_certify)
    return p


def _bp_options(s) -> None:
    s.add_argument("--belief-convention", choices=(bp.BELIEF_DEFAULT, bp.BELIEF_LITERAL),
                   default=bp.BELIEF_DEFAULT)
    s.add_argument("--init", choices=(bp.INIT_COST, bp.INIT_ZERO), default=bp.INIT_COST,
                   help="initial messages: the edge cost (default) or zero")


def main(argv=None) -> int:
    start = time.perf_counter()
    want_json = False
    try:
        args = build_parser().parse_args(argv)
        want_json = args.json
        report, code = args.func(args)
    except SizeLimitError as exc:
        return _fail(f"size cap: {exc}", EXIT_SIZE, want_json)
    except (UsageError, GenerationError) as exc:
        return _fail(str(exc), EXIT_USAGE, want_json)
    except (OSError, json.JSONDecodeError) as exc:
        return _fail(f"cannot read input: {exc}", EXIT_USAGE, want_json)
    except GmnfError as exc:
        return _fail(str(exc), EXIT_USAGE, want_json)
    if report is not None:
        report.wall_time = time.perf_counter() - start
        print(report.to_json() if want_json else report.to_text())
    return code


def _fail(message: str, code: int, want_json: bool) -> int:
    if want_json:
        print(json.dumps({"error": message, "exit_code": code}))
    print(f"gmnf: error: {message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
