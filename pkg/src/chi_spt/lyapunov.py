"""Quadratic Lyapunov certificates for the reduced and boundary-layer models.

V and W are built from discrete Lyapunov equations on finite-difference
linearizations at the origin; their sandwich constants are exact for
quadratic forms, while decrease factors are sampled on the nonlinear maps
and therefore only estimates.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.linalg

from ._numerics import central_jacobian
from .analysis import DecayResult, default_grid, fit_full_decay, ordered_map
from .errors import CertificateError, DimensionError
from .manifold import DEFAULT_SOLVER, ManifoldSolverConfig, solve_h
from .model.system import Box, ChiSystem

SIGMA_MARGIN = 1e-6
LYAP_RESIDUAL_TOL = 1e-10
LINEARIZATION_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class QuadraticForm:
    """``V(u) = u^T P u`` with P symmetric positive definite.

    Asymmetric P is rejected rather than symmetrized.
    """

    P: np.ndarray

    def __post_init__(self):
        P = np.array(self.P, dtype=float)
        if P.ndim == 0:
            P = P.reshape(1, 1)
        if P.ndim != 2 or P.shape[0] != P.shape[1]:
            raise DimensionError(f"P must be square, got shape {P.shape}")
        if not np.all(np.isfinite(P)):
            raise ValueError("P must be finite")
        if not np.array_equal(P, P.T):
            raise ValueError("P must be exactly symmetric")
        eig = np.linalg.eigvalsh(P)
        if eig[0] <= 0:
            raise CertificateError(f"P is not positive definite (eigenvalues {eig.tolist()})")
        P.flags.writeable = False
        object.__setattr__(self, "P", P)

    @property
    def dim(self):
        return self.P.shape[0]

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        return float(u @ self.P @ u)


def sandwich_bounds(V: QuadraticForm) -> tuple[float, float]:
    """Tight ``(gamma_lo, gamma_hi)`` with ``gamma_lo |u|^2 <= V(u) <= gamma_hi |u|^2``."""
    if not isinstance(V, QuadraticForm):
        V = QuadraticForm(V)
    eig = np.linalg.eigvalsh(V.P)
    return float(eig[0]), float(eig[-1])


def decrease_factor(V: QuadraticForm, step, domain: Box, n_samples: int, seed: int,
                    param_domain: Box | None = None) -> float:
    """Sampled ``max V(step(u)) / V(u)`` over nonzero ``u`` in ``domain``.

    With ``param_domain`` the map is called as ``step(u, p)`` and the max is
    taken jointly over ``(p, u)`` samples, which is how uniformity of the
    boundary-layer decrease in the slow state is checked.
    """
    if n_samples < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    if domain.dim != V.dim:
        raise DimensionError(f"domain dimension {domain.dim} does not match V ({V.dim})")
    rng = np.random.default_rng(seed)
    us = domain.sample(rng, n_samples)
    ps = param_domain.sample(rng, n_samples) if param_domain is not None else [None] * n_samples
    best = None
    for u, p in zip(us, ps):
        vu = V(u)
        if vu == 0.0:
            continue
        nxt = step(u) if p is None else step(u, p)
        ratio = V(nxt) / vu
        if not np.isfinite(ratio):
            raise CertificateError(f"non-finite decrease ratio at u={u.tolist()}")
        best = ratio if best is None else max(best, ratio)
    if best is None:
        raise ValueError("every sample landed on the origin")
    return float(best)


def _check_sigma(sigma):
    if not 0.0 < sigma < 1.0:
        raise CertificateError(f"sigma must lie in (0, 1), got {sigma}")


@dataclass(frozen=True)
class LyapunovCertificate:
    gamma_lo: float
    gamma_hi: float
    sigma: float
    source: str  # "reduced" or "boundary"

    def __post_init__(self):
        if self.source not in ("reduced", "boundary"):
            raise ValueError(f"source must be 'reduced' or 'boundary', got {self.source!r}")
        if not 0.0 < self.gamma_lo <= self.gamma_hi:
            raise CertificateError(f"need 0 < gamma_lo <= gamma_hi, got {self.gamma_lo}, {self.gamma_hi}")
        _check_sigma(self.sigma)

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class CompositeCertificate:
    gamma_lo: float
    gamma_hi: float
    sigma: float

    def __post_init__(self):
        if not 0.0 < self.gamma_lo <= self.gamma_hi:
            raise CertificateError(f"need 0 < gamma_lo <= gamma_hi, got {self.gamma_lo}, {self.gamma_hi}")
        _check_sigma(self.sigma)

    def to_dict(self):
        return asdict(self)


def compose_certificates(cx: LyapunovCertificate, cy: LyapunovCertificate) -> CompositeCertificate:
    """Constants of ``nu = V + W``: min of lower bounds, max of upper bounds and of sigmas."""
    if cx.source != "reduced" or cy.source != "boundary":
        raise ValueError("compose_certificates expects (reduced, boundary) certificates")
    for c in (cx, cy):
        _check_sigma(c.sigma)
    return CompositeCertificate(
        gamma_lo=min(cx.gamma_lo, cy.gamma_lo),
        gamma_hi=max(cx.gamma_hi, cy.gamma_hi),
        sigma=max(cx.sigma, cy.sigma),
    )


def solve_discrete_lyapunov(A) -> QuadraticForm:
    """P with ``A^T P A - P = -I`` for a Schur-stable A."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"A must be square, got {A.shape}")
    rho = float(np.max(np.abs(np.linalg.eigvals(A))))
    if not rho < 1.0:
        raise CertificateError(f"spectral radius {rho:.6g} >= 1: no quadratic Lyapunov function exists")
    eye = np.eye(A.shape[0])
    P = scipy.linalg.solve_discrete_lyapunov(A.T, eye)
    P = 0.5 * (P + P.T)
    resid = float(np.linalg.norm(A.T @ P @ A - P + eye))
    if not resid <= LYAP_RESIDUAL_TOL:
        raise CertificateError(f"Lyapunov solve inaccurate (residual {resid:.3g})")
    return QuadraticForm(P)


def reduced_map(sys: ChiSystem, cfg: ManifoldSolverConfig = DEFAULT_SOLVER):
    """``x -> x + f(mu h(x))``."""
    return lambda x: x + sys.f(sys.mu * solve_h(sys, x, cfg))


def boundary_map(sys: ChiSystem, cfg: ManifoldSolverConfig = DEFAULT_SOLVER):
    """``(y, x_s) -> g(x_s, y + h(x_s), 0) - h(x_s)``."""
    w0 = np.zeros(sys.m_z)

    def step(y, xs):
        h = solve_h(sys, xs, cfg)
        return sys.g(xs, y + h, w0) - h

    return step


@dataclass
class CertificateBundle:
    A_reduced: np.ndarray
    A_boundary: np.ndarray
    V: QuadraticForm
    W: QuadraticForm
    reduced: LyapunovCertificate
    boundary: LyapunovCertificate
    composite: CompositeCertificate


def build_certificates(sys: ChiSystem, n_samples: int = 1000, seed: int = 42,
                       cfg: ManifoldSolverConfig = DEFAULT_SOLVER) -> CertificateBundle:
    """Instantiate both Lyapunov hypotheses for ``sys`` and compose them.

    Raises :class:`CertificateError` when a linearization is not Schur
    stable or a sampled decrease factor is not below ``1 - SIGMA_MARGIN``.
    """
    fr = reduced_map(sys, cfg)
    fb = boundary_map(sys, cfg)
    xs0 = np.zeros(sys.n_x)
    A_r = central_jacobian(fr, np.zeros(sys.n_x), LINEARIZATION_STEP)
    A_b = central_jacobian(lambda y: fb(y, xs0), np.zeros(sys.m_z), LINEARIZATION_STEP)
    certs = []
    forms = []
    for A, step, dom, param, source, sd in (
        (A_r, fr, sys.domain_x, None, "reduced", seed),
        (A_b, fb, sys.domain_z, sys.domain_x, "boundary", seed + 1),
    ):
        try:
            V = solve_discrete_lyapunov(A)
        except CertificateError as exc:
            raise CertificateError(f"{source} model: {exc}") from None
        lo, hi = sandwich_bounds(V)
        sigma = decrease_factor(V, step, dom, n_samples, sd, param)
        if not sigma < 1.0 - SIGMA_MARGIN:
            raise CertificateError(f"{source} model: sampled decrease factor {sigma:.6g} is not below 1")
        forms.append(V)
        certs.append(LyapunovCertificate(lo, hi, sigma, source))
    return CertificateBundle(A_r, A_b, forms[0], forms[1], certs[0], certs[1], compose_certificates(*certs))


@dataclass
class StabilityReport:
    passed: bool
    composite: dict
    N: int
    trajectories: list = field(default_factory=list)
    max_rho: float | None = None

    def to_dict(self):
        return asdict(self)


def check_full_system_stability(sys: ChiSystem, composite: CompositeCertificate, grid=None, N: int = 2000,
                                cfg: ManifoldSolverConfig = DEFAULT_SOLVER) -> StabilityReport:
    """Empirical exponential stability of the coupled system.

    Each initial condition in ``grid`` (default: 3x3 grid over half the
    domain boxes) is simulated and ``|(x, z - h(x))|`` is fitted to
    ``C rho^n``. Passes iff every nontrivial trajectory has ``rho < 1``.
    """
    if not isinstance(composite, CompositeCertificate):
        raise TypeError("composite must be a CompositeCertificate")
    if grid is None:
        grid = default_grid(sys)
    for x0, z0 in grid:
        if not (sys.domain_x.contains(x0) and sys.domain_z.contains(z0)):
            raise ValueError(f"initial condition ({list(x0)}, {list(z0)}) lies outside the domain")
    results: list[DecayResult] = ordered_map(lambda ic: fit_full_decay(sys, ic[0], ic[1], N, cfg), grid)
    rhos = [r.rho for r in results if not r.trivial and r.rho is not None]
    passed = all(r.trivial or (r.rho is not None and r.rho < 1.0) for r in results)
    return StabilityReport(
        passed=passed, composite=composite.to_dict(), N=N,
        trajectories=[r.to_dict() for r in results],
        max_rho=max(rhos) if rhos else None,
    )
