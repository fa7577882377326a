#!/usr/bin/env python3
"""Sweep mu for a system and print sup errors with the fitted log-log slope.

    python3 scripts/run_scaling_sweep.py builtin:SAT1 --mu 1e-1,1e-2,1e-3,1e-4
    python3 scripts/run_scaling_sweep.py configs/coupled2.cfg --N 4000
"""

import argparse
import math
import time

from chi_spt.analysis import TARGETS, report_from_sweep, run_sweep
from chi_spt.model import builtin_system, parse_config


def load(source):
    if source.startswith("builtin:"):
        return builtin_system(source.split(":", 1)[1].upper())
    with open(source, encoding="utf-8") as fh:
        return parse_config(fh.read()).build()


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("system", nargs="?", default="builtin:LIN1")
    ap.add_argument("--mu", default="1e-1,1e-2,1e-3,1e-4")
    ap.add_argument("--N", type=int, default=2000)
    ap.add_argument("--x0", type=float, default=1.0)
    ap.add_argument("--z0", type=float, default=1.0)
    args = ap.parse_args()

    sys_ = load(args.system)
    mus = sorted({float(m) for m in args.mu.split(",")}, reverse=True)
    t0 = time.perf_counter()
    points = run_sweep(sys_, [args.x0] * sys_.n_x, [args.z0] * sys_.m_z, mus, args.N)
    reports = [report_from_sweep(points, t) for t in TARGETS]
    print(f"{sys_.name}: {len(mus)} mu values, N={args.N}, {time.perf_counter() - t0:.2f}s")
    print(f"{'mu':>10} " + " ".join(f"{t:>22}" for t in TARGETS) + f" {'n1':>5}")
    for i, mu in enumerate(mus):
        row = " ".join(f"{r.sup_errors[i]:>22.6e}" for r in reports)
        print(f"{mu:>10.1e} {row} {reports[2].n1_values[i]:>5}")
    for r in reports:
        verdict = "PASS" if r.passes() else "FAIL"
        print(f"{r.target:<22} slope={r.slope:.4f} r2={r.r2:.5f} C=exp(intercept)={math.exp(r.intercept):.4g} {verdict}")


if __name__ == "__main__":
    main()
