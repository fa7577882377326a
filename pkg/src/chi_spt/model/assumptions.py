from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .._numerics import central_jacobian, sampled_lipschitz
from ..errors import NonFiniteError
from .system import ORIGIN_TOL, Box, ChiSystem, eval_f, eval_g

INVERTIBILITY_THRESHOLD = 1e-8
FD_STEP = 1e-6


@dataclass
class AssumptionReport:
    """Outcome of the three standing-assumption checks.

    ``lipschitz_f``/``lipschitz_g`` are sampled lower bounds (``"estimate"``),
    never a proof; check (b) passes when they are finite. ``lipschitz_g`` is a
    single constant over all three arguments of g.
    """

    invertibility_margin: float
    invertibility_threshold: float
    invertibility_ok: bool
    lipschitz_f: float
    lipschitz_g: float
    lipschitz_kind: str
    lipschitz_ok: bool
    origin_residual_f: float
    origin_residual_g: float
    origin_tol: float
    origin_ok: bool
    n_samples: int
    seed: int

    @property
    def ok(self):
        return self.invertibility_ok and self.lipschitz_ok and self.origin_ok

    def to_dict(self):
        d = asdict(self)
        d["ok"] = self.ok
        return d


def validate_assumptions(sys: ChiSystem, n_samples: int = 1000, seed: int = 42) -> AssumptionReport:
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    for box in (sys.domain_x, sys.domain_z):
        if box.is_degenerate():
            raise ValueError("assumption sampling needs domain boxes with positive width")
    rng = np.random.default_rng(seed)
    xs = sys.domain_x.sample(rng, n_samples)
    zs = sys.domain_z.sample(rng, n_samples)
    zero_w = np.zeros(sys.m_z)
    eye = np.eye(sys.m_z)
    margin = np.inf
    for x, z in zip(xs, zs):
        jac = central_jacobian(lambda zz: eval_g(sys, x, zz, zero_w), z, FD_STEP)
        s_min = np.linalg.svd(jac - eye, compute_uv=False)[-1]
        if not np.isfinite(s_min):
            raise NonFiniteError(f"Jacobian of g not finite at x={x.tolist()}, z={z.tolist()}")
        margin = min(margin, float(s_min))

    lf = sampled_lipschitz(lambda w: eval_f(sys, w), sys.domain_z, n_samples, seed + 1)
    nx, mz = sys.n_x, sys.m_z
    joint = Box(
        np.concatenate([sys.domain_x.lo, sys.domain_z.lo, sys.domain_z.lo]),
        np.concatenate([sys.domain_x.hi, sys.domain_z.hi, sys.domain_z.hi]),
    )
    lg = sampled_lipschitz(
        lambda u: eval_g(sys, u[:nx], u[nx:nx + mz], u[nx + mz:]), joint, n_samples, seed + 2
    )
    rf = float(np.linalg.norm(eval_f(sys, zero_w)))
    rg = float(np.linalg.norm(eval_g(sys, np.zeros(nx), zero_w, zero_w)))
    return AssumptionReport(
        invertibility_margin=margin,
        invertibility_threshold=INVERTIBILITY_THRESHOLD,
        invertibility_ok=margin > INVERTIBILITY_THRESHOLD,
        lipschitz_f=lf,
        lipschitz_g=lg,
        lipschitz_kind="estimate",
        lipschitz_ok=bool(np.isfinite(lf) and np.isfinite(lg)),
        origin_residual_f=rf,
        origin_residual_g=rg,
        origin_tol=ORIGIN_TOL,
        origin_ok=rf <= ORIGIN_TOL and rg <= ORIGIN_TOL,
        n_samples=n_samples,
        seed=seed,
    )
