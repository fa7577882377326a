#!/usr/bin/env python3
"""Print the first steps of z, the composite approximation and the boundary layer.

Shows how quickly the fast transient dies out and how close
``h(x_s) + y`` tracks ``z`` for a single mu.
"""

import argparse

import numpy as np

from chi_spt.analysis import fit_exponential_decay, n1_threshold
from chi_spt.model import builtin_system
from chi_spt.simulate import compose_approximation, simulate_boundary_layer, simulate_full, simulate_reduced
from chi_spt.trajectory import Trajectory


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--system", default="SAT1")
    ap.add_argument("--mu", type=float, default=0.01)
    ap.add_argument("--steps", type=int, default=15)
    ap.add_argument("--N", type=int, default=2000)
    args = ap.parse_args()

    s = builtin_system(args.system, mu=args.mu)
    X, Z = simulate_full(s, [1.0], [1.0], args.N)
    Xs, Zs = simulate_reduced(s, [1.0], args.N)
    Y = simulate_boundary_layer(s, Xs, Z.states[0] - Zs.states[0], args.N, zs=Zs)
    approx = compose_approximation(Zs, Y)
    fit = fit_exponential_decay(Trajectory(Y.norms()), 1e-10)
    n1 = n1_threshold(args.mu, fit.theta)
    print(f"{s.name} mu={args.mu}: theta={fit.theta:.4f} n1={n1}")
    print(f"{'n':>4} {'z':>12} {'h(xs)+y':>12} {'y':>12} {'|z-h(xs)|':>12}")
    for n in range(args.steps + 1):
        z, a, y, zs = Z.states[n, 0], approx.states[n, 0], Y.states[n, 0], Zs.states[n, 0]
        print(f"{n:>4} {z:>12.6f} {a:>12.6f} {y:>12.3e} {abs(z - zs):>12.3e}")
    print(f"sup |z - (h(xs)+y)| = {np.max(np.abs(Z.states - approx.states)):.3e}")


if __name__ == "__main__":
    main()
