"""Bound comparison on a batch of random instances.

Writes one CSV row per (instance, method) and prints how often each
relaxation closes the gap to the exact optimum.

    python scripts/compare_random.py --count 50 --n 6 --edges 5 --rank 4 -o bounds.csv
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
from collections import defaultdict
from dataclasses import dataclass

from multiflower.cli import CompareReport, run_method
from multiflower.core import InstanceError, generate_random
from multiflower.cuts import DEFAULT_TOL
from multiflower.lpsolve import BOUND_TOL, brute_force_optimum


@dataclass
class CompareConfig:
    count: int = 50
    n: int = 6
    edges: int = 5
    rank: int = 4
    seed: int = 0
    methods: tuple[str, ...] = ("std", "flower", "eflower", "rmc:leftmost", "rmc:balanced", "rmc:minsize")
    tol: float = DEFAULT_TOL
    max_rounds: int = 100
    output: str | None = None


def parse_config(argv=None) -> CompareConfig:
    defaults = CompareConfig()
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    for f in dataclasses.fields(CompareConfig):
        if f.name == "methods":
            p.add_argument("--methods", default=",".join(defaults.methods))
        elif f.name == "output":
            p.add_argument("-o", "--output")
        else:
            p.add_argument(f"--{f.name.replace('_', '-')}", type=type(getattr(defaults, f.name)), default=getattr(defaults, f.name))
    args = vars(p.parse_args(argv))
    args["methods"] = tuple(m for m in args["methods"].split(",") if m)
    return CompareConfig(**args)


def run(cfg: CompareConfig) -> list[dict]:
    rows = []
    seed = cfg.seed
    done = 0
    while done < cfg.count:
        try:
            inst = generate_random(cfg.n, cfg.edges, cfg.rank, seed)
        except InstanceError:
            seed += 1
            continue
        report = CompareReport(f"seed{seed}")
        for m in cfg.methods:
            report.rows.append(run_method(inst, m, cfg.tol, cfg.max_rounds))
        report.exact = brute_force_optimum(inst)[0]
        report.check_dominance()
        for rec in report.records():
            rows.append({"instance": report.instance, **rec})
        seed += 1
        done += 1
    return rows


def summarize(rows: list[dict]) -> str:
    exact = {r["instance"]: r["bound"] for r in rows if r["method"] == "exact"}
    tight = defaultdict(int)
    gap = defaultdict(float)
    for r in rows:
        if r["method"] == "exact":
            continue
        g = r["bound"] - exact[r["instance"]]
        gap[r["method"]] += g
        tight[r["method"]] += g <= BOUND_TOL
    n = len(exact)
    lines = [f"{'method':<14} {'tight':>7} {'mean gap':>10}"]
    for m in sorted(gap):
        lines.append(f"{m:<14} {tight[m]:>4}/{n:<2} {gap[m] / n:>10.4f}")
    return "\n".join(lines)


def main(argv=None) -> int:
    cfg = parse_config(argv)
    rows = run(cfg)
    if cfg.output:
        with open(cfg.output, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(rows[0]))
            w.writeheader()
            w.writerows(rows)
    print(summarize(rows))
    return 0


if __name__ == "__main__":
    sys.exit(main())
