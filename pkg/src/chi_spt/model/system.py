from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from ..errors import AssumptionError, DimensionError, NonFiniteError
from . import expr as ex

ORIGIN_TOL = 1e-12


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lo_i, hi_i]``."""

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lo, dtype=float).reshape(-1)
        hi = np.array(self.hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape or lo.size == 0:
            raise DimensionError("box bounds must be non-empty and of equal length")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise ValueError("box bounds must be finite")
        if np.any(lo > hi):
            raise ValueError(f"empty box: lo={lo.tolist()} hi={hi.tolist()}")
        lo.flags.writeable = False
        hi.flags.writeable = False
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def cube(cls, dim, half_width=2.0):
        return cls(np.full(dim, -half_width), np.full(dim, half_width))

    @property
    def dim(self):
        return self.lo.size

    def contains(self, u):
        u = np.asarray(u, dtype=float)
        return bool(np.all(u >= self.lo) and np.all(u <= self.hi))

    def contains_origin(self):
        return self.contains(np.zeros(self.dim))

    def is_degenerate(self):
        return bool(np.any(self.hi <= self.lo))

    def sample(self, rng, n):
        """``n`` uniform points, shape ``(n, dim)``."""
        return rng.uniform(self.lo, self.hi, size=(n, self.dim))

    def scaled(self, factor):
        return Box(self.lo * factor, self.hi * factor)


def _as_vector(v, dim, what):
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1 or arr.size != dim:
        raise DimensionError(f"{what} must have dimension {dim}, got shape {np.shape(v)}")
    return arr


@dataclass(frozen=True)
class ChiSystem:
    """Two-time-scale map ``x+ = x + f(mu z)``, ``z+ = g(x, z, mu z)``.

    ``f`` takes the scaled fast state ``w = mu z`` (length ``m_z``) and returns a
    length-``n_x`` array; ``g`` takes ``(x, z, w)``. Both must be pure. The
    origin condition ``f(0) = 0``, ``g(0, 0, 0) = 0`` is checked on
    construction.

    ``mu = 0`` is accepted so the singular limit can be simulated; the
    analysis and CLI entry points insist on ``mu > 0``.
    """

    n_x: int
    m_z: int
    f: Callable[[np.ndarray], np.ndarray] = field(repr=False)
    g: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray] = field(repr=False)
    mu: float
    domain_x: Box = None
    domain_z: Box = None
    name: str = "unnamed"
    f_exprs: tuple | None = field(default=None, repr=False)
    g_exprs: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        if int(self.n_x) != self.n_x or self.n_x < 1 or int(self.m_z) != self.m_z or self.m_z < 1:
            raise DimensionError("n_x and m_z must be positive integers")
        mu = float(self.mu)
        if not np.isfinite(mu) or mu < 0:
            raise ValueError(f"mu must be a finite non-negative number, got {self.mu}")
        object.__setattr__(self, "mu", mu)
        if self.domain_x is None:
            object.__setattr__(self, "domain_x", Box.cube(self.n_x))
        if self.domain_z is None:
            object.__setattr__(self, "domain_z", Box.cube(self.m_z))
        if self.domain_x.dim != self.n_x or self.domain_z.dim != self.m_z:
            raise DimensionError("domain box dimensions do not match n_x/m_z")
        if not (self.domain_x.contains_origin() and self.domain_z.contains_origin()):
            raise ValueError("domain boxes must contain the origin")
        f0 = np.linalg.norm(eval_f(self, np.zeros(self.m_z)))
        g0 = np.linalg.norm(eval_g(self, np.zeros(self.n_x), np.zeros(self.m_z), np.zeros(self.m_z)))
        if f0 > ORIGIN_TOL or g0 > ORIGIN_TOL:
            raise AssumptionError(
                f"origin is not an equilibrium: |f(0)| = {f0:.3g}, |g(0,0,0)| = {g0:.3g} "
                f"(tolerance {ORIGIN_TOL:g})"
            )

    def with_mu(self, mu) -> "ChiSystem":
        return replace(self, mu=mu)

    @classmethod
    def from_exprs(cls, n_x, m_z, f_exprs, g_exprs, mu, domain_x=None, domain_z=None, name="unnamed"):
        """Build a system whose maps are compiled DSL expressions."""
        f_exprs, g_exprs = tuple(f_exprs), tuple(g_exprs)
        if len(f_exprs) != n_x or len(g_exprs) != m_z:
            raise DimensionError(
                f"expected {n_x} f and {m_z} g components, got {len(f_exprs)} and {len(g_exprs)}"
            )
        f_c = ex.compile_vector(f_exprs, ("w",))
        g_c = ex.compile_vector(g_exprs, ("x", "z", "w"))

        def f(w):
            try:
                return np.array(f_c(w.tolist()))
            except (ZeroDivisionError, OverflowError, ValueError) as exc:
                raise NonFiniteError(f"f is singular at w={w.tolist()}: {exc}") from None

        def g(x, z, w):
            try:
                return np.array(g_c(x.tolist(), z.tolist(), w.tolist()))
            except (ZeroDivisionError, OverflowError, ValueError) as exc:
                raise NonFiniteError(
                    f"g is singular at x={x.tolist()}, z={z.tolist()}, w={w.tolist()}: {exc}"
                ) from None

        return cls(n_x, m_z, f, g, mu, domain_x, domain_z, name, f_exprs, g_exprs)


def eval_f(sys: ChiSystem, w) -> np.ndarray:
    w = _as_vector(w, sys.m_z, "w")
    if not np.all(np.isfinite(w)):
        raise NonFiniteError("non-finite input to f")
    out = np.asarray(sys.f(w), dtype=float)
    if out.shape != (sys.n_x,):
        raise DimensionError(f"f returned shape {out.shape}, expected ({sys.n_x},)")
    if not np.all(np.isfinite(out)):
        raise NonFiniteError(f"f(w) is not finite at w={w.tolist()}")
    return out


def eval_g(sys: ChiSystem, x, z, w) -> np.ndarray:
    x = _as_vector(x, sys.n_x, "x")
    z = _as_vector(z, sys.m_z, "z")
    w = _as_vector(w, sys.m_z, "w")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z)) and np.all(np.isfinite(w))):
        raise NonFiniteError("non-finite input to g")
    out = np.asarray(sys.g(x, z, w), dtype=float)
    if out.shape != (sys.m_z,):
        raise DimensionError(f"g returned shape {out.shape}, expected ({sys.m_z},)")
    if not np.all(np.isfinite(out)):
        raise NonFiniteError(f"g is not finite at x={x.tolist()}, z={z.tolist()}, w={w.tolist()}")
    return out
