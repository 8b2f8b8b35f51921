"""Expected-improvement style acquisition over frontier nodes.

Lower is better: the score ``mean - gamma * var`` is an optimistic bound for a
minimization objective, so larger ``gamma`` favours uncertain candidates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .multiindex import MultiIndexSet, frontier
from .sampling import GeneratingNodes, nodes_for_indices
from .surrogate import BootstrapEnsemble, ensemble_mean_var

__all__ = [
    "AcquisitionConfig",
    "FrontierExhausted",
    "acquisition_value",
    "select_next_index",
    "gamma_at",
    "SCHEDULES",
]

SCHEDULES = ("constant", "linear-decay")


class FrontierExhausted(RuntimeError):
    """No frontier index has a generating node left."""


@dataclass(frozen=True)
class AcquisitionConfig:
    gamma: float = 0.5
    gamma_schedule: str = "constant"
    decay_end: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")
        if self.gamma_schedule not in SCHEDULES:
            raise ValueError(f"unknown gamma schedule {self.gamma_schedule!r}")
        if not 0.0 <= self.decay_end <= 1.0:
            raise ValueError("decay_end must lie in [0, 1]")
        if self.gamma_schedule == "linear-decay" and self.decay_end > self.gamma:
            raise ValueError("decay_end must not exceed gamma")


def acquisition_value(mean, var, gamma: float):
    return mean - gamma * var


def gamma_at(config: AcquisitionConfig, iteration: int, max_iterations: int) -> float:
    if config.gamma_schedule == "constant" or max_iterations <= 0:
        return config.gamma
    t = min(max(iteration / max_iterations, 0.0), 1.0)
    return config.gamma + (config.decay_end - config.gamma) * t


def select_next_index(A: MultiIndexSet, gen: GeneratingNodes, E: BootstrapEnsemble, gamma: float):
    """Frontier index whose node minimizes the acquisition, and that node.

    Ties go to the graded-lex smallest index (``np.argmin`` returns the first
    minimum and the frontier is in canonical order).
    """
    cands = frontier(A, max_exponent=gen.K)
    if not cands:
        raise FrontierExhausted(f"every frontier index of |A|={len(A)} exceeds K={gen.K}")
    P = nodes_for_indices(cands, gen)
    mean, var = ensemble_mean_var(E, P)
    scores = acquisition_value(mean, var, gamma)
    k = int(np.argmin(scores))
    return cands[k], P[k].copy()
