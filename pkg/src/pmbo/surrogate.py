"""Polynomial surrogates in the Newton basis and their bootstrap ensembles.

A surrogate over the downward-closed set ``A`` is written as

    Q(x) = sum_{a in A} c_a N_a(x),   N_a(x) = prod_i prod_{j < a_i} (x_i - g_j)

with ``g`` the generating nodes. On the unisolvent nodes ``p_a = (g_{a_1}, ...)``
the design matrix is lower triangular in canonical order, so fitting exactly
|A| values on those nodes interpolates.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import kernels
from .multiindex import MultiIndexSet
from .sampling import GeneratingNodes

__all__ = [
    "ORIGINS",
    "RankDeficientError",
    "SampleSet",
    "PolynomialSurrogate",
    "BootstrapEnsemble",
    "design_matrix",
    "fit",
    "fit_with_fallback",
    "evaluate",
    "gradient",
    "bootstrap_fit",
    "ensemble_mean_var",
    "RANK_RTOL",
    "FALLBACK_RIDGE",
]

ORIGINS = ("seed", "frontier", "exploit")
RANK_RTOL = 1e-10
FALLBACK_RIDGE = 1e-8


class RankDeficientError(np.linalg.LinAlgError):
    """The unregularized least-squares system is numerically singular."""


class SampleSet:
    """Append-only record of evaluated points on the unit cube."""

    def __init__(self, dimension: int):
        if dimension < 1:
            raise ValueError("dimension must be >= 1")
        self.dimension = int(dimension)
        self._x: list = []
        self._f: list = []
        self._origin: list = []

    @classmethod
    def from_arrays(cls, X, f, origin="seed") -> "SampleSet":
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        s = cls(X.shape[1])
        for x, v in zip(X, np.asarray(f, dtype=np.float64).ravel()):
            s.append(x, v, origin)
        return s

    def append(self, x, f, origin: str = "seed") -> None:
        x = np.array(x, dtype=np.float64).ravel()
        if x.shape[0] != self.dimension:
            raise ValueError(f"point has dimension {x.shape[0]}, expected {self.dimension}")
        if np.any(np.abs(x) > 1.0):
            raise ValueError(f"point {x} lies outside [-1, 1]^{self.dimension}")
        f = float(f)
        if not np.isfinite(f):
            raise ValueError(f"non-finite objective value at {x}")
        if origin not in ORIGINS:
            raise ValueError(f"unknown sample origin {origin!r}")
        x.setflags(write=False)
        self._x.append(x)
        self._f.append(f)
        self._origin.append(origin)

    def __len__(self) -> int:
        return len(self._f)

    @property
    def X(self) -> np.ndarray:
        if not self._x:
            return np.empty((0, self.dimension))
        return np.vstack(self._x)

    @property
    def f(self) -> np.ndarray:
        return np.array(self._f, dtype=np.float64)

    @property
    def origins(self) -> tuple:
        return tuple(self._origin)

    def subset(self, rows) -> "SampleSet":
        out = SampleSet(self.dimension)
        for r in rows:
            out._x.append(self._x[r])
            out._f.append(self._f[r])
            out._origin.append(self._origin[r])
        return out

    def find(self, x, radius: float = 1e-9) -> int | None:
        """Index of the first stored point within ``radius`` of ``x``, if any."""
        if not self._x:
            return None
        d = np.linalg.norm(self.X - np.asarray(x, dtype=np.float64), axis=1)
        hit = np.flatnonzero(d < radius)
        return int(hit[0]) if hit.size else None


@dataclass(frozen=True)
class PolynomialSurrogate:
    A: MultiIndexSet
    gen: GeneratingNodes
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.float64).ravel()
        if c.shape[0] != len(self.A):
            raise ValueError(f"{c.shape[0]} coefficients for {len(self.A)} multi-indices")
        if not np.all(np.isfinite(c)):
            raise ValueError("surrogate coefficients must be finite")
        if len(self.A) and self.A.max_exponent() > self.gen.K:
            raise ValueError("multi-index exponent exceeds the generating nodes")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def dimension(self) -> int:
        return self.A.dimension

    def __call__(self, X) -> np.ndarray | float:
        return evaluate(self, X)

    def gradient(self, X) -> np.ndarray:
        return gradient(self, X)

    def value_and_gradient(self, X):
        """Batched values ``(n,)`` and gradients ``(n, m)`` for ``X`` of shape ``(n, m)``."""
        X = _as_points(X, self.dimension)
        return kernels.newton_eval_grad(X, self.A.exponents, self.gen.nodes, self.coeffs)

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "multi_indices": [list(a) for a in self.A],
            "generating_nodes": self.gen.nodes.tolist(),
            "coefficients": self.coeffs.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PolynomialSurrogate":
        return cls(
            MultiIndexSet(d["dimension"], d["multi_indices"]),
            GeneratingNodes(np.asarray(d["generating_nodes"])),
            np.asarray(d["coefficients"]),
        )


def _as_points(X, m: int) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1)
    if X.shape[1] != m:
        raise ValueError(f"points have dimension {X.shape[1]}, expected {m}")
    return np.ascontiguousarray(X)


def design_matrix(points, A: MultiIndexSet, gen: GeneratingNodes) -> np.ndarray:
    """Newton basis matrix with entry ``(i, k) = N_{A[k]}(points[i])``."""
    X = _as_points(points, A.dimension)
    if len(A) and A.max_exponent() > gen.K:
        raise ValueError("multi-index exponent exceeds the generating nodes")
    return kernels.newton_basis(X, A.exponents, gen.nodes)


def _solve(D: np.ndarray, f: np.ndarray, ridge: float) -> np.ndarray:
    n, k = D.shape
    if ridge > 0:
        D = np.vstack([D, np.sqrt(ridge) * np.eye(k)])
        f = np.concatenate([f, np.zeros(k)])
    elif n < k:
        raise RankDeficientError(f"{n} samples cannot determine {k} coefficients")
    # gelsy: column-pivoted QR with incremental condition estimation of R
    c, _, rank, _ = scipy.linalg.lstsq(D, f, cond=RANK_RTOL, lapack_driver="gelsy",
                                       check_finite=False)
    if rank < k:
        raise RankDeficientError(f"least-squares system has numerical rank {rank} < {k}")
    return c


def fit(samples: SampleSet, A: MultiIndexSet, gen: GeneratingNodes, ridge: float = 0.0) -> PolynomialSurrogate:
    """Least-squares fit ``argmin ||D c - f||^2 + ridge ||c||^2``.

    Raises
    ------
    RankDeficientError
        If ``ridge == 0`` and the system is singular to within ``RANK_RTOL``.
    """
    if len(samples) < 1:
        raise ValueError("fit needs at least one sample")
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    D = design_matrix(samples.X, A, gen)
    return PolynomialSurrogate(A, gen, _solve(D, samples.f, ridge))


def fit_with_fallback(samples, A, gen, ridge: float = 0.0) -> PolynomialSurrogate:
    try:
        return fit(samples, A, gen, ridge)
    except RankDeficientError:
        return fit(samples, A, gen, max(ridge, FALLBACK_RIDGE))


def evaluate(Q: PolynomialSurrogate, x):
    """Value of ``Q`` at one point (returns float) or at rows of ``x`` (returns array)."""
    X = _as_points(x, Q.dimension)
    vals = kernels.newton_eval(X, Q.A.exponents, Q.gen.nodes, Q.coeffs)
    return float(vals[0]) if np.ndim(x) == 1 else vals


def gradient(Q: PolynomialSurrogate, x) -> np.ndarray:
    X = _as_points(x, Q.dimension)
    G = kernels.newton_grad(X, Q.A.exponents, Q.gen.nodes, Q.coeffs)
    return G[0] if np.ndim(x) == 1 else G


@dataclass(frozen=True)
class BootstrapEnsemble:
    members: tuple

    def __post_init__(self):
        if len(self.members) < 1:
            raise ValueError("an ensemble needs at least one member")
        A, gen = self.members[0].A, self.members[0].gen
        if any(q.A != A or q.gen != gen for q in self.members):
            raise ValueError("ensemble members must share A and the generating nodes")
        C = np.vstack([q.coeffs for q in self.members])
        C.setflags(write=False)
        object.__setattr__(self, "_C", C)

    @property
    def B(self) -> int:
        return len(self.members)

    @property
    def A(self) -> MultiIndexSet:
        return self.members[0].A

    @property
    def gen(self) -> GeneratingNodes:
        return self.members[0].gen

    def member_values(self, X) -> np.ndarray:
        """``(n, B)`` matrix of every member evaluated at every row of ``X``."""
        D = design_matrix(X, self.A, self.gen)
        return D @ self._C.T


def bootstrap_fit(samples: SampleSet, A: MultiIndexSet, gen: GeneratingNodes, B: int = 20,
                  rng_seed: int = 0, ridge: float = 0.0) -> BootstrapEnsemble:
    """Refit on ``B`` resamples of whole ``(x, f)`` pairs drawn with replacement.

    All resample draws happen before any fit, so the ensemble depends only on
    ``rng_seed``. A singular resample is refit with ``FALLBACK_RIDGE``.
    """
    if B < 1:
        raise ValueError("B must be >= 1")
    n = len(samples)
    if n < 1:
        raise ValueError("bootstrap needs at least one sample")
    rng = np.random.default_rng(rng_seed)
    draws = [rng.integers(0, n, size=n) for _ in range(B)]
    X, f = samples.X, samples.f
    D = design_matrix(X, A, gen)
    members = []
    for rows in draws:
        Db, fb = D[rows], f[rows]
        try:
            c = _solve(Db, fb, ridge)
        except RankDeficientError:
            c = _solve(Db, fb, max(ridge, FALLBACK_RIDGE))
        members.append(PolynomialSurrogate(A, gen, c))
    return BootstrapEnsemble(tuple(members))


def ensemble_mean_var(E: BootstrapEnsemble, x):
    """Pointwise ensemble mean and population variance (``1/B`` normalization)."""
    V = E.member_values(x)
    mean = V.mean(axis=1)
    var = np.maximum(((V - mean[:, None]) ** 2).mean(axis=1), 0.0)
    if np.ndim(x) == 1:
        return float(mean[0]), float(var[0])
    return mean, var
