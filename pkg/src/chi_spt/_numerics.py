"""Small numerical helpers shared by several modules."""

import numpy as np

from .errors import NonFiniteError


def central_jacobian(fn, u, step):
    """Central-difference Jacobian of ``fn`` at ``u``; column j perturbs ``u[j]``."""
    if not step > 0:
        raise ValueError(f"finite-difference step must be positive, got {step}")
    u = np.asarray(u, dtype=float)
    cols = []
    for j in range(u.size):
        e = np.zeros_like(u)
        e[j] = step
        cols.append((np.asarray(fn(u + e)) - np.asarray(fn(u - e))) / (2.0 * step))
    jac = np.column_stack(cols)
    if not np.all(np.isfinite(jac)):
        raise NonFiniteError(f"non-finite Jacobian at {u.tolist()}")
    return jac


def sampled_lipschitz(fn, box, n_pairs, seed):
    """Max of |fn(u) - fn(v)| / |u - v| over ``n_pairs`` uniform pairs in ``box``.

    The pairs for a given seed are a prefix of those for any larger
    ``n_pairs``, so the estimate is monotone in the sample budget.
    """
    if n_pairs < 1:
        raise ValueError(f"n_pairs must be >= 1, got {n_pairs}")
    if box.is_degenerate():
        raise ValueError("Lipschitz sampling needs a box with positive width on every axis")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(box.lo, box.hi, size=(n_pairs, 2, box.dim))
    best = None
    for u, v in pts:
        d = np.linalg.norm(u - v)
        if d == 0.0:
            continue
        fu, fv = np.asarray(fn(u), dtype=float), np.asarray(fn(v), dtype=float)
        if not (np.all(np.isfinite(fu)) and np.all(np.isfinite(fv))):
            raise NonFiniteError(f"map not finite near {u.tolist()} / {v.tolist()}")
        r = np.linalg.norm(fu - fv) / d
        best = r if best is None else max(best, r)
    if best is None:
        raise ValueError("all sampled pairs coincide")
    return float(best)
