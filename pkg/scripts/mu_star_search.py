#!/usr/bin/env python3
"""Empirical stability threshold mu* for a system.

For linear systems the result can be compared against the spectral radius
of the full Jacobian, which this script prints alongside when ``--linear``
is given.
"""

import argparse
import time

import numpy as np

from chi_spt._numerics import central_jacobian
from chi_spt.analysis import StabilityCriterion, find_mu_star
from chi_spt.model import builtin_system, parse_config


def load(source):
    if source.startswith("builtin:"):
        return builtin_system(source.split(":", 1)[1].upper())
    with open(source, encoding="utf-8") as fh:
        return parse_config(fh.read()).build()


def spectral_radius(sys_, mu):
    """Spectral radius of the full one-step map linearized at the origin."""
    s = sys_.with_mu(mu)

    def step(u):
        x, z = u[: s.n_x], u[s.n_x:]
        return np.concatenate([x + s.f(s.mu * z), s.g(x, z, s.mu * z)])

    J = central_jacobian(step, np.zeros(s.n_x + s.m_z), 1e-6)
    return float(np.max(np.abs(np.linalg.eigvals(J))))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("system", nargs="?", default="builtin:LIN1")
    ap.add_argument("--mu-hi", type=float, default=1.0)
    ap.add_argument("--delta", type=float, default=0.01)
    ap.add_argument("--N", type=int, default=2000)
    ap.add_argument("--linear", action="store_true", help="also report the Jacobian spectral radius")
    args = ap.parse_args()

    sys_ = load(args.system)
    crit = StabilityCriterion(delta=args.delta, N=args.N)
    t0 = time.perf_counter()
    mu_star = find_mu_star(sys_, args.mu_hi, crit)
    print(f"{sys_.name}: mu* = {mu_star:.6g} ({time.perf_counter() - t0:.1f}s)")
    if args.linear:
        for mu in (0.5 * mu_star, mu_star, min(1.2 * mu_star, args.mu_hi)):
            if mu > 0:
                print(f"  mu={mu:.4g}: spectral radius {spectral_radius(sys_, mu):.5f} (threshold {1 - args.delta})")


if __name__ == "__main__":
    main()
