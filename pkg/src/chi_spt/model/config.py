"""Plain-text system definitions.

The grammar is documented in ``docs/config_format.md``. In short, one
``key = value`` pair per line, ``#`` starts a comment, and:

    name = LIN1
    n_x = 1
    m_z = 1
    mu = 0.1
    f1 = -w1
    g1 = 0.25*x1 + 0.5*z1 + w1
    domain_x = -2, 2
    domain_z = -2, 2

``f<i>`` may only reference ``w1..w<m_z>`` (the slot receiving ``mu*z``);
``g<i>`` may reference ``x``, ``z`` and ``w``. Optional overrides live under
``solver.`` and ``analysis.`` prefixes.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DimensionError
from . import expr as ex
from .system import Box, ChiSystem

SOLVER_KEYS = {"tol": float, "max_iter": int, "fd_step": float, "initial_guess_policy": str}
ANALYSIS_KEYS = {"N": int, "seed": int, "mu_values": "floats", "n_samples": int}

_KEY_RE = re.compile(r"[A-Za-z_][A-Za-z_0-9.]*$")
_COMPONENT_RE = re.compile(r"([fg])([1-9]\d*)$")
_DOMAIN_RE = re.compile(r"domain_([xz])([1-9]\d*)?$")


@dataclass
class SystemConfig:
    name: str
    n_x: int
    m_z: int
    mu: float
    f_exprs: tuple
    g_exprs: tuple
    domain_x: Box
    domain_z: Box
    solver: dict = field(default_factory=dict)
    analysis: dict = field(default_factory=dict)

    def build(self) -> ChiSystem:
        return ChiSystem.from_exprs(
            self.n_x, self.m_z, self.f_exprs, self.g_exprs, self.mu,
            self.domain_x, self.domain_z, self.name,
        )


@dataclass
class _Entry:
    value: str
    line: int
    col: int  # 0-based column of the value within the raw line


def _split_lines(text):
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        if not body.strip():
            continue
        if "=" not in body:
            raise ConfigError("expected 'key = value'", lineno, len(body) - len(body.lstrip()) + 1)
        key_part, value_part = body.split("=", 1)
        key = key_part.strip()
        if not _KEY_RE.match(key):
            raise ConfigError(f"invalid key {key!r}", lineno, len(key_part) - len(key_part.lstrip()) + 1)
        if key in entries:
            raise ConfigError(f"duplicate key {key!r} (first set on line {entries[key].line})", lineno, 1)
        col = len(key_part) + 1 + (len(value_part) - len(value_part.lstrip()))
        value = value_part.strip()
        if not value:
            raise ConfigError(f"missing value for {key!r}", lineno, col + 1)
        entries[key] = _Entry(value, lineno, col)
    return entries


def _number(entry, key, kind=float):
    try:
        value = kind(entry.value)
    except ValueError:
        raise ConfigError(f"{key} must be {'an integer' if kind is int else 'a number'}, got {entry.value!r}",
                          entry.line, entry.col + 1) from None
    if kind is float and not np.isfinite(value):
        raise ConfigError(f"{key} must be finite", entry.line, entry.col + 1)
    return value


def _floats(entry, key):
    parts = [p.strip() for p in entry.value.split(",")]
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"{key} must be a comma-separated list of numbers", entry.line, entry.col + 1) from None
    if not all(np.isfinite(values)):
        raise ConfigError(f"{key} must be finite", entry.line, entry.col + 1)
    return values


def _require(entries, key):
    if key not in entries:
        raise ConfigError(f"missing required key {key!r}")
    return entries.pop(key)


def _build_box(entries, family, dim):
    lo = np.full(dim, -2.0)
    hi = np.full(dim, 2.0)
    keys = sorted(k for k in entries if (m := _DOMAIN_RE.match(k)) and m.group(1) == family)
    # the all-axes form applies first so per-axis keys can override it
    keys.sort(key=lambda k: _DOMAIN_RE.match(k).group(2) is not None)
    for key in keys:
        entry = entries.pop(key)
        bounds = _floats(entry, key)
        if len(bounds) != 2 or bounds[0] > bounds[1]:
            raise ConfigError(f"{key} must be 'lo, hi' with lo <= hi", entry.line, entry.col + 1)
        axis = _DOMAIN_RE.match(key).group(2)
        if axis is None:
            lo[:], hi[:] = bounds
        else:
            i = int(axis)
            if i > dim:
                raise ConfigError(f"dimension mismatch: {key} but dimension is {dim}", entry.line, 1)
            lo[i - 1], hi[i - 1] = bounds
    if np.any(lo > 0) or np.any(hi < 0):
        raise ConfigError(f"domain_{family} must contain the origin")
    return Box(lo, hi)


def parse_config(text: str) -> SystemConfig:
    entries = _split_lines(text)
    name = entries.pop("name").value if "name" in entries else "unnamed"
    n_x = _number(_require(entries, "n_x"), "n_x", int)
    m_z = _number(_require(entries, "m_z"), "m_z", int)
    if n_x < 1 or m_z < 1:
        raise ConfigError("n_x and m_z must be positive")
    mu_entry = _require(entries, "mu")
    mu = _number(mu_entry, "mu")
    if mu <= 0:
        raise ConfigError("mu must be positive", mu_entry.line, mu_entry.col + 1)

    comps = {"f": {}, "g": {}}
    for key in list(entries):
        m = _COMPONENT_RE.match(key)
        if m:
            comps[m.group(1)][int(m.group(2))] = entries.pop(key)
    scopes = {"f": {"w": m_z}, "g": {"x": n_x, "z": m_z, "w": m_z}}
    parsed = {}
    for fam, dim in (("f", n_x), ("g", m_z)):
        extra = sorted(i for i in comps[fam] if i > dim)
        if extra:
            e = comps[fam][extra[0]]
            raise ConfigError(f"dimension mismatch: {fam}{extra[0]} given but {fam} has {dim} component(s)", e.line, 1)
        missing = [i for i in range(1, dim + 1) if i not in comps[fam]]
        if missing:
            raise ConfigError(f"dimension mismatch: missing {fam}{missing[0]} ({fam} has {dim} component(s))")
        parsed[fam] = tuple(
            ex.parse_expr(comps[fam][i].value, scopes[fam], comps[fam][i].line, comps[fam][i].col)
            for i in range(1, dim + 1)
        )

    domain_x = _build_box(entries, "x", n_x)
    domain_z = _build_box(entries, "z", m_z)

    solver, analysis = {}, {}
    for key in list(entries):
        entry = entries.pop(key)
        prefix, _, sub = key.partition(".")
        table = {"solver": (SOLVER_KEYS, solver), "analysis": (ANALYSIS_KEYS, analysis)}.get(prefix)
        if table is None or sub not in table[0]:
            raise ConfigError(f"unknown key {key!r}", entry.line, 1)
        kind = table[0][sub]
        if kind == "floats":
            table[1][sub] = _floats(entry, key)
        elif kind is str:
            table[1][sub] = entry.value
        else:
            table[1][sub] = _number(entry, key, kind)

    return SystemConfig(name, n_x, m_z, mu, parsed["f"], parsed["g"], domain_x, domain_z, solver, analysis)


def parse_system_config(text: str) -> ChiSystem:
    """Parse a config document and build the system it describes.

    Raises :class:`ConfigError` (syntax, unknown identifier, dimension
    mismatch) or :class:`AssumptionError` if the origin is not an equilibrium.
    """
    return parse_config(text).build()


def format_system(sys: ChiSystem) -> str:
    """Render an expression-backed system back into config text."""
    if sys.f_exprs is None or sys.g_exprs is None:
        raise DimensionError("only expression-backed systems can be formatted")
    lines = [f"name = {sys.name}", f"n_x = {sys.n_x}", f"m_z = {sys.m_z}", f"mu = {sys.mu!r}"]
    lines += [f"f{i} = {ex.to_source(e)}" for i, e in enumerate(sys.f_exprs, 1)]
    lines += [f"g{i} = {ex.to_source(e)}" for i, e in enumerate(sys.g_exprs, 1)]
    for fam, box in (("x", sys.domain_x), ("z", sys.domain_z)):
        for i, (lo, hi) in enumerate(zip(box.lo, box.hi), 1):
            lines.append(f"domain_{fam}{i} = {float(lo)!r}, {float(hi)!r}")
    return "\n".join(lines) + "\n"
