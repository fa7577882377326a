"""Simulators for the full system, the reduced model and the boundary layer."""

from __future__ import annotations

import numpy as np

from .errors import DimensionError, DivergenceError, NonFiniteError, SolverError
from .manifold import DEFAULT_SOLVER, ManifoldSolverConfig, h_along_trajectory, solve_h
from .model.system import ChiSystem, _as_vector
from .trajectory import Trajectory

DIVERGENCE_NORM = 1e12
MAX_STATES = 10**7

__all__ = [
    "Trajectory", "simulate_full", "simulate_reduced", "simulate_boundary_layer",
    "compose_approximation", "DIVERGENCE_NORM",
]


def _check_horizon(N):
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    if N + 1 > MAX_STATES:
        raise ValueError(f"N={N} exceeds the {MAX_STATES}-state limit")
    return int(N)


def _guard(n, *parts):
    norm = float(np.sqrt(sum(float(p @ p) for p in parts)))
    if not np.isfinite(norm):
        raise NonFiniteError("non-finite state", n)
    if norm > DIVERGENCE_NORM:
        raise DivergenceError(f"state norm {norm:.3g} exceeds {DIVERGENCE_NORM:g}", n, norm)


def simulate_full(sys: ChiSystem, x0, z0, N: int) -> tuple[Trajectory, Trajectory]:
    """Iterate ``x+ = x + f(mu z)``, ``z+ = g(x, z, mu z)`` for ``N`` steps."""
    N = _check_horizon(N)
    x = _as_vector(x0, sys.n_x, "x0")
    z = _as_vector(z0, sys.m_z, "z0")
    _guard(0, x, z)
    X = np.empty((N + 1, sys.n_x))
    Z = np.empty((N + 1, sys.m_z))
    X[0], Z[0] = x, z
    mu, f, g = sys.mu, sys.f, sys.g
    for n in range(N):
        w = mu * z
        x, z = x + f(w), g(x, z, w)
        _guard(n + 1, x, z)
        X[n + 1], Z[n + 1] = x, z
    return Trajectory(X), Trajectory(Z)


def simulate_reduced(sys: ChiSystem, x0, N: int, cfg: ManifoldSolverConfig = DEFAULT_SOLVER) -> tuple[Trajectory, Trajectory]:
    """Reduced model: ``x_s+ = x_s + f(mu h(x_s))`` with ``z_s = h(x_s)``."""
    N = _check_horizon(N)
    x = _as_vector(x0, sys.n_x, "x0")
    _guard(0, x)
    X = np.empty((N + 1, sys.n_x))
    Z = np.empty((N + 1, sys.m_z))
    h = None
    for n in range(N + 1):
        try:
            h = solve_h(sys, x, cfg, h)
        except (SolverError, NonFiniteError) as exc:
            raise type(exc)(str(exc), n) from None
        X[n], Z[n] = x, h
        if n < N:
            x = x + sys.f(sys.mu * h)
            _guard(n + 1, x)
    return Trajectory(X), Trajectory(Z)


def simulate_boundary_layer(
    sys: ChiSystem,
    xs: Trajectory,
    y0,
    N: int,
    cfg: ManifoldSolverConfig = DEFAULT_SOLVER,
    zs: Trajectory | None = None,
    freeze_slow_state: bool = False,
) -> Trajectory:
    """Boundary-layer model ``y+ = g(x_s[n], y + h(x_s[n]), 0) - h(x_s[n])``.

    The slow state advances with ``xs`` as written; ``freeze_slow_state``
    holds it at ``xs[0]`` instead (the classical frozen-slow-variable
    variant). ``zs`` may carry precomputed ``h(xs)`` values to skip the
    manifold solves.
    """
    N = _check_horizon(N)
    if xs.dim != sys.n_x:
        raise DimensionError(f"slow trajectory dimension {xs.dim} does not match n_x={sys.n_x}")
    if len(xs) < N + 1 and not freeze_slow_state:
        raise ValueError(f"slow trajectory has {len(xs)} states, need at least N+1={N + 1}")
    y = _as_vector(y0, sys.m_z, "y0")
    _guard(0, y)
    needed = 1 if freeze_slow_state else N
    if zs is None:
        hs = h_along_trajectory(sys, Trajectory(xs.states[:needed], xs.start_index), cfg).states
    else:
        if zs.dim != sys.m_z or len(zs) < needed:
            raise DimensionError("precomputed manifold trajectory has the wrong shape")
        hs = zs.states
    Y = np.empty((N + 1, sys.m_z))
    Y[0] = y
    w0 = np.zeros(sys.m_z)
    g = sys.g
    for n in range(N):
        k = 0 if freeze_slow_state else n
        h = hs[k]
        y = g(xs.states[k], y + h, w0) - h
        _guard(n + 1, y)
        Y[n + 1] = y
    return Trajectory(Y, xs.start_index)


def compose_approximation(zs: Trajectory, y: Trajectory) -> Trajectory:
    """Two-time-scale approximation ``h(x_s[n]) + y[n]`` of ``z[n]``."""
    if len(zs) != len(y) or zs.dim != y.dim:
        raise DimensionError(f"cannot compose trajectories of shapes {zs.states.shape} and {y.states.shape}")
    return Trajectory(zs.states + y.states, zs.start_index)
