from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NonFiniteError


@dataclass(frozen=True)
class Trajectory:
    """Finite sequence of equal-length state vectors indexed from ``start_index``.

    ``states`` has shape ``(length, dim)`` and is stored read-only.
    """

    states: np.ndarray
    start_index: int = 0

    def __post_init__(self):
        arr = np.array(self.states, dtype=float)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DimensionError(f"trajectory states must have shape (length>=1, dim>=1), got {arr.shape}")
        if int(self.start_index) != self.start_index or self.start_index < 0:
            raise ValueError("start_index must be a non-negative integer")
        bad = np.flatnonzero(~np.all(np.isfinite(arr), axis=1))
        if bad.size:
            raise NonFiniteError("trajectory contains non-finite states", int(bad[0]) + self.start_index)
        arr.flags.writeable = False
        object.__setattr__(self, "states", arr)
        object.__setattr__(self, "start_index", int(self.start_index))

    @property
    def dim(self):
        return self.states.shape[1]

    def __len__(self):
        return self.states.shape[0]

    def __getitem__(self, i):
        return self.states[i]

    @property
    def indices(self):
        return np.arange(self.start_index, self.start_index + len(self))

    def norms(self):
        return np.linalg.norm(self.states, axis=1)

    def to_csv(self) -> str:
        """CSV text: header ``n,comp_0,...``; values with 17 significant digits."""
        buf = io.StringIO()
        buf.write(",".join(["n"] + [f"comp_{j}" for j in range(self.dim)]) + "\n")
        for n, row in zip(self.indices, self.states):
            buf.write(",".join([str(n)] + ["%.17g" % v for v in row]) + "\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "Trajectory":
        rows = list(csv.reader(io.StringIO(text)))
        header, body = rows[0], [r for r in rows[1:] if r]
        if not header or header[0] != "n" or header[1:] != [f"comp_{j}" for j in range(len(header) - 1)]:
            raise ValueError(f"bad trajectory CSV header: {header}")
        if not body:
            raise ValueError("trajectory CSV has no rows")
        idx = [int(r[0]) for r in body]
        if idx != list(range(idx[0], idx[0] + len(idx))):
            raise ValueError("trajectory CSV indices must be consecutive")
        return cls(np.array([[float(v) for v in r[1:]] for r in body]), idx[0])
