"""Per-evaluation logs shared by PMBO and the baseline optimizers."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

import numpy as np

__all__ = ["TraceRecord", "RunTrace"]


@dataclass(frozen=True)
class TraceRecord:
    eval_index: int
    x: tuple
    f: float
    best_so_far: float
    origin: str


@dataclass
class RunTrace:
    """Every objective evaluation of one run, in order.

    ``reason`` is ``"budget"`` or ``"converged"``; ``surrogate`` holds the
    final surrogate for PMBO runs.
    """

    dimension: int
    records: list = field(default_factory=list)
    reason: str = "budget"
    surrogate: Optional[Any] = None

    def log(self, x, f: float, origin: str) -> TraceRecord:
        f = float(f)
        best = f if not self.records else min(self.records[-1].best_so_far, f)
        rec = TraceRecord(len(self.records), tuple(float(v) for v in np.ravel(x)), f, best, origin)
        self.records.append(rec)
        return rec

    def __len__(self) -> int:
        return len(self.records)

    @property
    def X(self) -> np.ndarray:
        return np.array([r.x for r in self.records], dtype=np.float64).reshape(-1, self.dimension)

    @property
    def f(self) -> np.ndarray:
        return np.array([r.f for r in self.records], dtype=np.float64)

    @property
    def best_so_far(self) -> np.ndarray:
        return np.array([r.best_so_far for r in self.records], dtype=np.float64)

    @property
    def best(self) -> tuple:
        """``(x_best, f_best)``; the first evaluation attaining the minimum wins ties."""
        f = self.f
        k = int(np.argmin(f))
        return np.array(self.records[k].x), float(f[k])
