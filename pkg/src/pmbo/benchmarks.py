"""Analytic test objectives and the affine map between their boxes and [-1, 1]^m."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "Objective",
    "ObjectiveError",
    "to_native",
    "to_unit",
    "himmelblau",
    "hartmann3",
    "rosenbrock",
    "get_objective",
    "OBJECTIVE_NAMES",
    "HARTMANN3_ALPHA",
    "HARTMANN3_A",
    "HARTMANN3_P",
]


class ObjectiveError(ValueError):
    """Objective returned a non-finite value."""

    def __init__(self, name, x, value):
        super().__init__(f"objective {name!r} returned {value!r} at unit-cube point {list(x)}")
        self.x = np.asarray(x)
        self.value = value


def to_native(x_unit, box) -> np.ndarray:
    box = np.asarray(box, dtype=np.float64)
    lo, hi = box[:, 0], box[:, 1]
    return lo + (np.asarray(x_unit, dtype=np.float64) + 1.0) * (hi - lo) / 2.0


def to_unit(x_native, box) -> np.ndarray:
    box = np.asarray(box, dtype=np.float64)
    lo, hi = box[:, 0], box[:, 1]
    return 2.0 * (np.asarray(x_native, dtype=np.float64) - lo) / (hi - lo) - 1.0


def himmelblau(x) -> float:
    x, y = float(x[0]), float(x[1])
    return (x * x + y - 11.0) ** 2 + (x + y * y - 7.0) ** 2


# Standard 4x3 Hartmann tables (Dixon & Szego).
HARTMANN3_ALPHA = np.array([1.0, 1.2, 3.0, 3.2])
HARTMANN3_A = np.array([
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
    [3.0, 10.0, 30.0],
    [0.1, 10.0, 35.0],
])
HARTMANN3_P = 1e-4 * np.array([
    [3689.0, 1170.0, 2673.0],
    [4699.0, 4387.0, 7470.0],
    [1091.0, 8732.0, 5547.0],
    [381.0, 5743.0, 8828.0],
])


def hartmann3(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    inner = np.sum(HARTMANN3_A * (x[None, :] - HARTMANN3_P) ** 2, axis=1)
    return float(-np.sum(HARTMANN3_ALPHA * np.exp(-inner)))


def rosenbrock(x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] < 2:
        raise ValueError("Rosenbrock needs m >= 2")
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


@dataclass(frozen=True)
class Objective:
    """A native-domain function exposed on the unit cube.

    Calling the objective with a unit-cube point maps it to ``native_box`` and
    evaluates there; non-finite results raise :class:`ObjectiveError`.
    """

    name: str
    dimension: int
    native_box: np.ndarray = field(repr=False)
    evaluator: Callable = field(repr=False)
    known_optimum: Optional[tuple] = None  # (x_native, f, provenance)

    def __post_init__(self):
        box = np.array(self.native_box, dtype=np.float64).reshape(self.dimension, 2)
        if np.any(box[:, 0] >= box[:, 1]):
            raise ValueError("native box needs lo < hi in every dimension")
        box.setflags(write=False)
        object.__setattr__(self, "native_box", box)

    def __call__(self, x_unit) -> float:
        value = float(self.evaluator(to_native(x_unit, self.native_box)))
        if not np.isfinite(value):
            raise ObjectiveError(self.name, x_unit, value)
        return value

    def check_known_optimum(self, atol: float = 1e-6) -> bool:
        if self.known_optimum is None:
            return True
        x, f, _ = self.known_optimum
        return abs(self.evaluator(np.asarray(x)) - f) <= atol


# x* / f* refined by multistart L-BFGS-B on the native box (tests/test_benchmarks.py).
HARTMANN3_XSTAR = (0.114589, 0.555649, 0.852547)
HARTMANN3_FSTAR = -3.86278


def _himmelblau2():
    return Objective("himmelblau2", 2, [[-5.0, 5.0]] * 2, himmelblau, ((3.0, 2.0), 0.0, "closed form"))


def _hartmann3():
    return Objective("hartmann3", 3, [[0.0, 1.0]] * 3, hartmann3,
                     (HARTMANN3_XSTAR, HARTMANN3_FSTAR, "multistart local descent"))


def _rosenbrock(m: int):
    if m < 2:
        raise ValueError("Rosenbrock needs m >= 2")
    return Objective(f"rosenbrock{m}" if m == 6 else f"rosenbrockN:{m}", m, [[-2.048, 2.048]] * m,
                     rosenbrock, ((1.0,) * m, 0.0, "closed form"))


OBJECTIVE_NAMES = ("himmelblau2", "hartmann3", "rosenbrock6", "rosenbrockN:<m>")


def get_objective(name: str) -> Objective:
    """Look up an objective by config name; raises ``KeyError`` for unknown names."""
    if name == "himmelblau2":
        obj = _himmelblau2()
    elif name == "hartmann3":
        obj = _hartmann3()
    elif name == "rosenbrock6":
        obj = _rosenbrock(6)
    elif name.startswith("rosenbrockN:"):
        try:
            m = int(name.split(":", 1)[1])
        except ValueError:
            raise KeyError(f"bad Rosenbrock dimension in {name!r}") from None
        obj = _rosenbrock(m)
    else:
        raise KeyError(f"unknown objective {name!r}; known: {', '.join(OBJECTIVE_NAMES)}")
    if not obj.check_known_optimum():
        raise RuntimeError(f"known optimum of {name} failed its self-check")
    return obj
