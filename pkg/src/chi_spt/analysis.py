"""Error metrics, O(mu) scaling fits, decay fits and empirical stability search."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._numerics import sampled_lipschitz
from .errors import ChiError, DimensionError, DivergenceError, FitError, NonFiniteError
from .manifold import DEFAULT_SOLVER, ManifoldSolverConfig, solve_h
from .model.system import Box, ChiSystem
from .simulate import simulate_boundary_layer, simulate_full, simulate_reduced
from .trajectory import Trajectory

ERROR_FLOOR = 1e-300
# boundary-layer samples below this fraction of |y[0]| are round-off, not decay
DECAY_REL_FLOOR = 1e-10
TARGETS = ("slow_error", "fast_composite_error", "fast_tail_error")


def max_workers():
    """Thread cap from ``CHI_SPT_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("CHI_SPT_THREADS", "1")))
    except ValueError:
        return 1


def ordered_map(fn, items):
    items = list(items)
    workers = min(max_workers(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def error_series(a: Trajectory, b: Trajectory) -> np.ndarray:
    """``e[n] = |a[n] - b[n]|_2``."""
    if len(a) != len(b) or a.dim != b.dim:
        raise DimensionError(f"trajectory shapes differ: {a.states.shape} vs {b.states.shape}")
    return np.linalg.norm(a.states - b.states, axis=1)


def _linfit(x, y):
    """Ordinary least squares ``y ~ slope * x + intercept``; returns (slope, intercept, r2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    sxx = float(np.sum((x - xm) ** 2))
    slope = float(np.sum((x - xm) * (y - ym)) / sxx)
    intercept = float(ym - slope * xm)
    ss_tot = float(np.sum((y - ym) ** 2))
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else (1.0 if ss_res == 0 else 0.0)
    return slope, intercept, min(1.0, max(0.0, r2))


@dataclass
class DecayFit:
    theta: float
    epsilon: float
    r2: float

    def to_dict(self):
        return asdict(self)


def fit_exponential_decay(Y: Trajectory, rel_floor: float = 0.0) -> DecayFit:
    """Fit ``|Y[n]| ~ epsilon |Y[0]| exp(-theta n)`` by least squares on ``ln|Y[n]|``.

    Only samples with ``|Y[n]| > rel_floor * |Y[0]|`` (and nonzero) enter the
    fit. Raises :class:`FitError` if fewer than three remain, if ``Y[0] = 0``,
    or if the fitted rate is not a decay.
    """
    norms = Y.norms()
    if norms[0] == 0.0:
        raise FitError("Y[0] is zero; decay prefactor undefined")
    keep = norms > max(0.0, rel_floor * norms[0])
    if np.count_nonzero(keep) < 3:
        raise FitError(f"need at least 3 nonzero samples, got {np.count_nonzero(keep)}")
    n = Y.indices[keep] - Y.start_index
    slope, intercept, r2 = _linfit(n, np.log(norms[keep]))
    if slope >= 0:
        raise FitError(f"boundary layer does not decay (fitted log-slope {slope:.3g} >= 0)")
    return DecayFit(theta=-slope, epsilon=math.exp(intercept) / float(norms[0]), r2=r2)


def n1_threshold(mu: float, theta: float) -> int:
    """Index ``ceil(-ln(mu) / theta)`` after which the boundary layer is O(mu)."""
    if not 0.0 < mu <= 1.0:
        raise ValueError(f"mu must lie in (0, 1], got {mu}")
    if not theta > 0:
        raise ValueError(f"theta must be positive, got {theta}")
    return max(0, math.ceil(-math.log(mu) / theta))


def estimate_lipschitz(fn: Callable, domain: Box, n_pairs: int, seed: int) -> float:
    """Sampled Lipschitz constant of ``fn`` on ``domain``.

    This is a lower bound on the true constant: the max of difference
    quotients over random pairs. More pairs (same seed) never lower it.
    """
    return sampled_lipschitz(fn, domain, n_pairs, seed)


@dataclass
class ScalingReport:
    target: str
    mu_values: list
    sup_errors: list
    slope: float
    intercept: float
    r2: float
    alpha: float
    beta: float
    below_floor: list = field(default_factory=list)
    degenerate: bool = False
    decay_fits: list = field(default_factory=list)  # fast_tail_error only
    n1_values: list = field(default_factory=list)  # fast_tail_error only

    def passes(self, lo=0.9, hi=1.1, min_r2=0.99):
        return (not self.degenerate) and lo <= self.slope <= hi and self.r2 >= min_r2

    def to_dict(self):
        return asdict(self)


@dataclass
class _SweepPoint:
    mu: float
    slow: float
    composite: float
    tail: float | None
    alpha: float
    beta: float
    decay: DecayFit | None
    n1: int | None


def _sweep_point(sys, x0, z0, mu, N, cfg, want_tail):
    s = sys.with_mu(mu)
    X, Z = simulate_full(s, x0, z0, N)
    Xs, Zs = simulate_reduced(s, x0, N, cfg)
    y0 = np.asarray(z0, dtype=float).reshape(-1) - Zs.states[0]
    Y = simulate_boundary_layer(s, Xs, y0, N, cfg, zs=Zs)
    slow = float(np.max(error_series(X, Xs)))
    composite = float(np.max(np.linalg.norm(Z.states - Zs.states - Y.states, axis=1)))
    tail = decay = n1 = None
    if want_tail:
        decay = fit_exponential_decay(Y, DECAY_REL_FLOOR)
        n1 = n1_threshold(mu, decay.theta)
        if n1 > N:
            raise FitError(f"n1={n1} exceeds the horizon N={N} at mu={mu}")
        tail = float(np.max(error_series(Z, Zs)[n1:]))
    return _SweepPoint(mu, slow, composite, tail, float(np.max(Xs.norms())), float(np.max(Y.norms())), decay, n1)


def run_sweep(sys, x0, z0, mu_values, N=2000, cfg=DEFAULT_SOLVER, want_tail=True):
    """Simulate all three models for each mu; results in input order."""
    return ordered_map(lambda mu: _sweep_point(sys, x0, z0, mu, N, cfg, want_tail), mu_values)


def _check_mu_values(mu_values):
    mus = [float(m) for m in mu_values]
    if len(set(mus)) < 2:
        raise ValueError("need at least two distinct mu values to fit a slope")
    if any(not (m > 0 and math.isfinite(m)) for m in mus):
        raise ValueError(f"all mu values must be positive and finite, got {mus}")
    return sorted(set(mus), reverse=True)


def report_from_sweep(points, target) -> ScalingReport:
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; choose from {TARGETS}")
    attr = {"slow_error": "slow", "fast_composite_error": "composite", "fast_tail_error": "tail"}[target]
    mus = [p.mu for p in points]
    raw = [getattr(p, attr) for p in points]
    below = [e <= ERROR_FLOOR for e in raw]
    errs = [max(e, ERROR_FLOOR) for e in raw]
    slope, intercept, r2 = _linfit(np.log(mus), np.log(errs))
    degenerate = all(below)
    if degenerate:
        r2 = 0.0
    top = points[0]
    return ScalingReport(
        target=target, mu_values=mus, sup_errors=raw, slope=slope, intercept=intercept, r2=r2,
        alpha=top.alpha, beta=top.beta, below_floor=below, degenerate=degenerate,
        decay_fits=[p.decay.to_dict() for p in points] if target == "fast_tail_error" else [],
        n1_values=[p.n1 for p in points] if target == "fast_tail_error" else [],
    )


def fit_order(sys: ChiSystem, x0, z0, mu_values: Sequence[float], N: int = 2000,
              target: str = "slow_error", cfg: ManifoldSolverConfig = DEFAULT_SOLVER) -> ScalingReport:
    """Empirical order of the selected approximation error in mu.

    For each mu the full system, reduced model and boundary layer (with
    ``y0 = z0 - h(x0)``) are simulated over ``N`` steps and the sup over n of
    the chosen error is recorded:

    - ``slow_error``: ``|x - x_s|``
    - ``fast_composite_error``: ``|z - h(x_s) - y|``
    - ``fast_tail_error``: ``|z - h(x_s)|`` for ``n >= n1(mu)``, with theta
      fitted to that mu's boundary layer

    ``slope`` is the least-squares slope of log(error) against log(mu).
    ``alpha``/``beta`` are ``sup |x_s|`` and ``sup |y|`` from the largest mu.
    """
    if target not in TARGETS:
        raise ValueError(f"unknown target {target!r}; choose from {TARGETS}")
    mus = _check_mu_values(mu_values)
    points = run_sweep(sys, x0, z0, mus, N, cfg, want_tail=target == "fast_tail_error")
    return report_from_sweep(points, target)


# --- empirical stability ----------------------------------------------------

def default_grid(sys: ChiSystem, k: int = 3, scale: float = 0.5) -> list[tuple[np.ndarray, np.ndarray]]:
    """``k*k`` initial conditions: every component of x (resp. z) set to one of
    ``k`` evenly spaced fractions of the box, from ``scale*lo`` to ``scale*hi``."""
    if k < 1:
        raise ValueError("grid size must be positive")
    fr = np.linspace(-1.0, 1.0, k) if k > 1 else np.zeros(1)

    def point(box, t):
        return scale * (np.where(t < 0, -t * box.lo, t * box.hi))

    return [(point(sys.domain_x, a), point(sys.domain_z, b)) for a in fr for b in fr]


@dataclass
class DecayResult:
    """Fitted geometric rate of one full-system trajectory."""

    x0: list
    z0: list
    rho: float | None
    r2: float | None
    trivial: bool = False
    diverged_at: int | None = None
    error: str | None = None

    def to_dict(self):
        return asdict(self)


def fit_full_decay(sys: ChiSystem, x0, z0, N: int, cfg: ManifoldSolverConfig = DEFAULT_SOLVER,
                   rel_floor: float = DECAY_REL_FLOOR) -> DecayResult:
    """Fit ``|(x[n], z[n] - h(x[n]))| ~ C rho^n`` on one full-system trajectory.

    Samples below ``rel_floor`` times the largest norm are ignored (they sit
    at the accuracy floor of h). A zero initial condition is reported as
    trivially stable; divergence is reported, not raised.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    z0 = np.asarray(z0, dtype=float).reshape(-1)
    base = DecayResult(x0.tolist(), z0.tolist(), None, None)
    if not (np.any(x0) or np.any(z0)):
        base.trivial = True
        return base
    try:
        X, Z = simulate_full(sys, x0, z0, N)
        norms = np.empty(len(X))
        h = None
        for i, x in enumerate(X.states):
            h = solve_h(sys, x, cfg, h)
            d = Z.states[i] - h
            norms[i] = math.sqrt(float(x @ x) + float(d @ d))
    except DivergenceError as exc:
        base.diverged_at = exc.index
        base.error = str(exc)
        return base
    except (NonFiniteError, ChiError) as exc:
        base.error = str(exc)
        return base
    keep = norms > rel_floor * norms.max()
    if np.count_nonzero(keep) < 3:
        base.error = "fewer than 3 samples above the accuracy floor"
        return base
    slope, _, r2 = _linfit(np.flatnonzero(keep), np.log(norms[keep]))
    base.rho = math.exp(slope)
    base.r2 = r2
    return base


@dataclass(frozen=True)
class StabilityCriterion:
    """Empirical exponential-stability test used by :func:`find_mu_star`."""

    delta: float = 0.01
    N: int = 2000
    grid: int = 3
    rel_resolution: float = 1e-2
    min_probe: float = 1e-6


def passes_criterion(sys: ChiSystem, criterion: StabilityCriterion, cfg=DEFAULT_SOLVER) -> bool:
    results = ordered_map(
        lambda ic: fit_full_decay(sys, ic[0], ic[1], criterion.N, cfg), default_grid(sys, criterion.grid)
    )
    for r in results:
        if r.trivial:
            continue
        if r.rho is None or not r.rho < 1.0 - criterion.delta:
            return False
    return True


def find_mu_star(sys: ChiSystem, mu_hi: float, criterion: StabilityCriterion = StabilityCriterion(),
                 cfg: ManifoldSolverConfig = DEFAULT_SOLVER) -> float:
    """Largest mu <= ``mu_hi`` passing the empirical stability criterion.

    Probes ``mu_hi, mu_hi/2, mu_hi/4, ...`` down to ``criterion.min_probe``
    until one passes, then bisects between it and the failing probe above
    to a relative resolution of ``criterion.rel_resolution``. Returns 0.0
    if no probe passes. Divergence counts as failure.
    """
    if not (mu_hi > 0 and math.isfinite(mu_hi)):
        raise ValueError(f"mu_hi must be positive, got {mu_hi}")

    def ok(mu):
        return passes_criterion(sys.with_mu(mu), criterion, cfg)

    if ok(mu_hi):
        return float(mu_hi)
    hi, lo = mu_hi, mu_hi / 2.0
    while not ok(lo):
        hi, lo = lo, lo / 2.0
        if lo < criterion.min_probe:
            return 0.0
    while (hi - lo) / lo > criterion.rel_resolution:
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
    return float(lo)
