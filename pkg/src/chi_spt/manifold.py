"""Slow manifold ``z = h(x)``: the solution of ``z = g(x, z, 0)``.

:func:`solve_h` uses Newton's method with a central-difference Jacobian.
:func:`fixed_point_oracle` is a deliberately separate route (plain damped
fixed-point iteration, no derivatives) used to cross-check it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._numerics import central_jacobian
from .errors import ConvergenceError, NonFiniteError, SingularJacobianError, SolverError
from .model.system import ChiSystem, _as_vector
from .trajectory import Trajectory

SINGULAR_RTOL = 1e-10
MAX_HALVINGS = 20
POLISH_STEPS = 2


@dataclass(frozen=True)
class ManifoldSolverConfig:
    tol: float = 1e-12
    max_iter: int = 50
    fd_step: float = 1e-6
    initial_guess_policy: str = "warm_start"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if not self.fd_step > 0:
            raise ValueError(f"fd_step must be positive, got {self.fd_step}")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise ValueError(f"max_iter must be a positive integer, got {self.max_iter}")
        if self.initial_guess_policy not in ("zero", "warm_start"):
            raise ValueError(f"initial_guess_policy must be 'zero' or 'warm_start', got {self.initial_guess_policy!r}")


DEFAULT_SOLVER = ManifoldSolverConfig()


def jacobian_gz(sys: ChiSystem, x, z, fd_step: float = 1e-6) -> np.ndarray:
    """Central-difference ``dg/dz`` at ``(x, z, 0)``, shape ``(m_z, m_z)``."""
    if not fd_step > 0:
        raise ValueError(f"fd_step must be positive, got {fd_step}")
    x = _as_vector(x, sys.n_x, "x")
    z = _as_vector(z, sys.m_z, "z")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
        raise NonFiniteError("non-finite input to jacobian_gz")
    w0 = np.zeros(sys.m_z)
    return central_jacobian(lambda zz: sys.g(x, zz, w0), z, fd_step)


def _newton_matrix(sys, x, z, w0, eye, fd_step):
    mat = jacobian_gz(sys, x, z, fd_step) - eye
    s = np.linalg.svd(mat, compute_uv=False)
    # a relative test alone never fires for 1x1 matrices; I sets the floor
    if s[-1] <= SINGULAR_RTOL * max(s[0], 1.0):
        raise SingularJacobianError(
            f"dg/dz - I is singular at x={x.tolist()}, z={z.tolist()} "
            f"(smallest singular value {s[-1]:.3g}, largest {s[0]:.3g})"
        )
    return mat


def solve_h(sys: ChiSystem, x, cfg: ManifoldSolverConfig = DEFAULT_SOLVER, z_init=None) -> np.ndarray:
    """Return ``z*`` with ``|g(x, z*, 0) - z*| <= cfg.tol``.

    ``z_init`` is used as the starting point only under the ``warm_start``
    policy. Once the tolerance is met, up to two further Newton steps are
    taken while they keep reducing the residual, which leaves the result at
    round-off level rather than just inside ``tol``.
    """
    x = _as_vector(x, sys.n_x, "x")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError(f"non-finite x: {x.tolist()}")
    if z_init is not None and cfg.initial_guess_policy == "warm_start":
        z = _as_vector(z_init, sys.m_z, "z_init").copy()
    else:
        z = np.zeros(sys.m_z)
    w0 = np.zeros(sys.m_z)
    eye = np.eye(sys.m_z)

    r = sys.g(x, z, w0) - z
    rn = float(np.linalg.norm(r))
    if not np.isfinite(rn):
        raise NonFiniteError(f"residual not finite at initial guess z={z.tolist()}")
    it = 0
    while rn > cfg.tol:
        if it >= cfg.max_iter:
            raise ConvergenceError(
                f"Newton did not converge in {cfg.max_iter} iterations at x={x.tolist()} (residual {rn:.3g})"
            )
        it += 1
        step = np.linalg.solve(_newton_matrix(sys, x, z, w0, eye, cfg.fd_step), r)
        z_new = z - step
        r_new = sys.g(x, z_new, w0) - z_new
        rn_new = float(np.linalg.norm(r_new))
        halvings = 0
        while not (rn_new <= rn) and halvings < MAX_HALVINGS:
            step = 0.5 * step
            z_new = z - step
            r_new = sys.g(x, z_new, w0) - z_new
            rn_new = float(np.linalg.norm(r_new))
            halvings += 1
        if not (np.all(np.isfinite(z_new)) and np.isfinite(rn_new)):
            raise NonFiniteError(f"Newton iterate became non-finite at x={x.tolist()}")
        z, r, rn = z_new, r_new, rn_new

    for _ in range(POLISH_STEPS):
        if rn == 0.0:
            break
        try:
            mat = _newton_matrix(sys, x, z, w0, eye, cfg.fd_step)
        except SingularJacobianError:
            break
        z_new = z - np.linalg.solve(mat, r)
        r_new = sys.g(x, z_new, w0) - z_new
        rn_new = float(np.linalg.norm(r_new))
        if not rn_new < rn:
            break
        z, r, rn = z_new, r_new, rn_new
    return z


def fixed_point_oracle(sys: ChiSystem, x, damping: float = 1.0, max_iter: int = 10000, tol: float = 1e-14) -> np.ndarray:
    """Damped iteration ``z <- (1-d) z + d g(x, z, 0)`` from ``z = 0``.

    Only valid where that iteration contracts. Raises if the residual does
    not reach ``tol`` within ``max_iter`` steps or if the iterate leaves the
    fast domain scaled by 10.
    """
    if not 0.0 < damping <= 1.0:
        raise ValueError(f"damping must lie in (0, 1], got {damping}")
    x = _as_vector(x, sys.n_x, "x")
    guard = sys.domain_z.scaled(10.0)
    w0 = np.zeros(sys.m_z)
    z = np.zeros(sys.m_z)
    for _ in range(max_iter + 1):
        gz = sys.g(x, z, w0)
        if np.linalg.norm(gz - z) <= tol:
            return z
        z = (1.0 - damping) * z + damping * gz
        if not np.all(np.isfinite(z)) or not guard.contains(z):
            raise ConvergenceError(f"fixed-point iterate escaped the fast domain at x={x.tolist()}")
    raise ConvergenceError(f"fixed-point iteration did not converge in {max_iter} steps at x={x.tolist()}")


def h_along_trajectory(sys: ChiSystem, xs: Trajectory, cfg: ManifoldSolverConfig = DEFAULT_SOLVER) -> Trajectory:
    """``z_s[n] = h(x_s[n])`` pointwise, warm-started from the previous index if configured."""
    if xs.dim != sys.n_x:
        raise ValueError(f"trajectory dimension {xs.dim} does not match n_x={sys.n_x}")
    out = np.empty((len(xs), sys.m_z))
    prev = None
    for i, x in enumerate(xs.states):
        try:
            prev = solve_h(sys, x, cfg, prev)
        except (SolverError, NonFiniteError) as exc:
            raise type(exc)(str(exc), xs.start_index + i) from None
        out[i] = prev
    return Trajectory(out, xs.start_index)
