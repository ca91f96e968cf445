"""Command-line interface: ``multiflower {gen,relax,compare,separate,project}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

from multiflower import cuts, lpsolve, rmc
from multiflower.core import InstanceError, generate_random, parse_instance, render_instance, to_hypergraph
from multiflower.cuts import CutError, GuardError
from multiflower.lpsolve import BOUND_TOL, SolverError

EXIT_INPUT = 1
EXIT_SOLVER = 2

CSV_COLUMNS = ["method", "bound", "n_vars", "n_ineqs", "rounds", "ms"]


class DominanceError(SolverError):
    """Bounds in a comparison contradict the known relaxation ordering."""


def default_tol() -> float:
    raw = os.environ.get("MULTIFLOWER_TOL")
    return float(raw) if raw else cuts.DEFAULT_TOL


def _read_instance(path):
    return parse_instance(Path(path).read_text(encoding="utf-8"))


def _rmc_for(spec: str, h):
    """Resolve an RMC method specifier (``leftmost``, ``balanced``, ``minsize``, ``file=PATH``)."""
    if spec in ("leftmost", "balanced"):
        return rmc.build_rmc(h, spec)
    if spec == "minsize":
        return rmc.min_size_rmc(h)[0]
    if spec.startswith("file="):
        partition = rmc.parse_rmc_file(Path(spec[5:]).read_text(encoding="utf-8"))
        return rmc.build_rmc(h, partition)
    raise InstanceError(f"unknown rmc specifier {spec!r}")


def run_method(inst, method: str, tol: float, max_rounds: int) -> lpsolve.BoundResult:
    if method.startswith("rmc:"):
        r = _rmc_for(method[4:], to_hypergraph(inst).hypergraph)
        res = lpsolve.relaxation_bound(inst, "rmc", r, tol=tol, max_rounds=max_rounds)
    elif method in ("std", "flower", "eflower"):
        res = lpsolve.relaxation_bound(inst, method, tol=tol, max_rounds=max_rounds)
    else:
        raise InstanceError(f"unknown method {method!r}")
    res.method = method
    return res


@dataclass
class CompareReport:
    instance: str
    rows: list[lpsolve.BoundResult] = field(default_factory=list)
    exact: float | None = None

    def check_dominance(self, tol: float = BOUND_TOL):
        bounds = {row.method: row.bound for row in self.rows}
        order = [("eflower", "flower"), ("flower", "std"), ("eflower", "std")]
        for lo, hi in order:
            if lo in bounds and hi in bounds and bounds[lo] > bounds[hi] + tol:
                raise DominanceError(f"bound({lo})={bounds[lo]} exceeds bound({hi})={bounds[hi]}")
        for name, val in bounds.items():
            if name.startswith("rmc:"):
                if "eflower" in bounds and bounds["eflower"] > val + tol:
                    raise DominanceError(f"bound(eflower) exceeds bound({name})")
                if "std" in bounds and val > bounds["std"] + tol:
                    raise DominanceError(f"bound({name}) exceeds bound(std)")
            if self.exact is not None and val < self.exact - tol:
                raise DominanceError(f"bound({name})={val} is below the exact optimum {self.exact}")

    def records(self) -> list[dict]:
        out = [
            {"method": r.method, "bound": r.bound, "n_vars": r.n_vars, "n_ineqs": r.n_ineqs, "rounds": r.rounds, "ms": r.ms}
            for r in self.rows
        ]
        if self.exact is not None:
            out.append({"method": "exact", "bound": self.exact, "n_vars": 0, "n_ineqs": 0, "rounds": 0, "ms": 0.0})
        return sorted(out, key=lambda rec: rec["method"])

    def table(self) -> str:
        recs = self.records()
        width = max(len("method"), *(len(r["method"]) for r in recs))
        lines = [f"{'method':<{width}}  {'bound':>12}  {'vars':>5}  {'ineqs':>6}  {'rounds':>6}  {'ms':>9}"]
        for r in recs:
            lines.append(
                f"{r['method']:<{width}}  {r['bound']:>12.6f}  {r['n_vars']:>5}  {r['n_ineqs']:>6}  {r['rounds']:>6}  {r['ms']:>9.1f}"
            )
        return "\n".join(lines)

    def to_json(self) -> str:
        return json.dumps({"instance": self.instance, "rows": self.records()}, indent=1) + "\n"

    def write_csv(self, path):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            for rec in self.records():
                writer.writerow(rec)


def cmd_gen(args) -> int:
    inst = generate_random(args.n, args.edges, args.rank, args.seed)
    text = render_instance(inst)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_relax(args) -> int:
    inst = _read_instance(args.instance)
    method = args.method
    if method == "rmc":
        method = "rmc:file=" + args.rmc_file if args.rmc_file else "rmc:" + args.rmc_strategy
    res = run_method(inst, method, args.tol, args.max_rounds)
    report = {
        "instance": Path(args.instance).stem,
        "method": method,
        "bound": res.bound,
        "n_vars": res.n_vars,
        "n_ineqs": res.n_ineqs,
        "rounds": res.rounds,
        "cuts_added": res.cuts_added,
        "converged": res.converged,
        "ms": res.ms,
    }
    print(f"bound={res.bound:.6f}")
    text = json.dumps(report, indent=1) + "\n"
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0 if res.converged else EXIT_SOLVER


def cmd_compare(args) -> int:
    inst = _read_instance(args.instance)
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not methods:
        raise InstanceError("at least one method is required")
    report = CompareReport(Path(args.instance).stem)
    for m in methods:
        report.rows.append(run_method(inst, m, args.tol, args.max_rounds))
    if args.exact:
        report.exact = lpsolve.brute_force_optimum(inst)[0]
    report.check_dominance()
    print(report.table())
    if args.json:
        Path(args.json).write_text(report.to_json(), encoding="utf-8")
    if args.csv:
        report.write_csv(args.csv)
    return 0


def cmd_separate(args) -> int:
    inst = _read_instance(args.instance)
    h = to_hypergraph(inst).hypergraph
    point = cuts.parse_point(Path(args.point).read_text(encoding="utf-8"), h)
    for ineq, viol in cuts.separate_extended_flower(h, point, args.tol):
        print(cuts.cut_report_line(ineq, viol))
    return 0


def cmd_project(args) -> int:
    inst = _read_instance(args.instance)
    h = to_hypergraph(inst).hypergraph
    r = rmc.build_rmc(h, rmc.parse_rmc_file(Path(args.rmc_file).read_text(encoding="utf-8")))
    system = rmc.rmc_projection_system(r)
    data = {
        "n": h.n,
        "edges": [list(e) for e in h.edges],
        "artificial": [list(a) for a in r.artificial],
        "inequalities": [ineq.to_json() for ineq in system],
    }
    text = json.dumps(data, indent=1) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="multiflower", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="solver diagnostics on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random instance")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--edges", type=int, required=True)
    p.add_argument("--rank", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_gen)

    tol = default_tol()
    p = sub.add_parser("relax", help="bound an instance with one relaxation")
    p.add_argument("instance")
    p.add_argument("--method", choices=["std", "flower", "eflower", "rmc"], default="std")
    p.add_argument("--rmc-strategy", choices=["leftmost", "balanced", "minsize"], default="leftmost")
    p.add_argument("--rmc-file")
    p.add_argument("--tol", type=float, default=tol)
    p.add_argument("--max-rounds", type=int, default=100)
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_relax)

    p = sub.add_parser("compare", help="bound an instance with several relaxations")
    p.add_argument("instance")
    p.add_argument("--methods", default="std,flower,eflower,rmc:leftmost")
    p.add_argument("--exact", action="store_true", help="add the brute-force optimum")
    p.add_argument("--tol", type=float, default=tol)
    p.add_argument("--max-rounds", type=int, default=100)
    p.add_argument("--json")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("separate", help="violated extended flower inequalities at a point")
    p.add_argument("instance")
    p.add_argument("--point", required=True)
    p.add_argument("--tol", type=float, default=tol)
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("project", help="RMC projected onto the original variables")
    p.add_argument("instance")
    p.add_argument("--rmc-file", required=True)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_project)
    return parser


def main(argv=None) -> int:
    try:
        parser = build_parser()
    except ValueError:
        print("error: MULTIFLOWER_TOL is not a number", file=sys.stderr)
        return EXIT_INPUT
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except (InstanceError, CutError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (SolverError, GuardError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
