"""Generating nodes, unisolvent nodes, and initial seed designs on [-1, 1]^m."""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import qmc

from .multiindex import DEFAULT_MAX_EXPONENT, graded_lex_indices

__all__ = [
    "GeneratingNodes",
    "SeedConfig",
    "SEED_STRATEGIES",
    "leja_chebyshev_nodes",
    "node_for_index",
    "nodes_for_indices",
    "random_uniform_points",
    "sobol_points",
    "chebyshev_seed",
    "MAX_SOBOL_DIMENSION",
]

SEED_STRATEGIES = ("random", "chebyshev", "sobol", "cmaes")
MAX_SOBOL_DIMENSION = 16
_TIE_RTOL = 1e-12


@dataclass(frozen=True)
class GeneratingNodes:
    """Ordered 1D nodes ``g_0, ..., g_K``; ``nodes[k]`` pairs with exponent ``k``."""

    nodes: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.array(self.nodes, dtype=np.float64).ravel()
        arr.setflags(write=False)
        object.__setattr__(self, "nodes", arr)

    @property
    def K(self) -> int:
        return len(self.nodes) - 1

    def __len__(self):
        return len(self.nodes)

    def __eq__(self, other):
        if not isinstance(other, GeneratingNodes):
            return NotImplemented
        return np.array_equal(self.nodes, other.nodes)

    def __hash__(self):
        return hash(self.nodes.tobytes())


@dataclass(frozen=True)
class SeedConfig:
    strategy: str = "chebyshev"
    size: int = 50
    rng_seed: int = 0

    def __post_init__(self):
        if self.strategy not in SEED_STRATEGIES:
            raise ValueError(f"unknown seed strategy {self.strategy!r}; choose from {SEED_STRATEGIES}")
        if self.size < 1:
            raise ValueError("seed size must be >= 1")


def leja_chebyshev_nodes(K: int = DEFAULT_MAX_EXPONENT) -> GeneratingNodes:
    """Chebyshev-Lobatto points of order ``K`` in greedy Leja order.

    Starts at 1; each further node maximizes the product of distances to the
    nodes already chosen, with near-ties (relative 1e-12) going to the
    smaller value.
    """
    if K < 0:
        raise ValueError("K must be >= 0")
    if K == 0:
        return GeneratingNodes(np.zeros(1))
    # sin form is exactly antisymmetric, so mirrored candidates tie exactly
    pts = np.sin(np.pi * (K - 2 * np.arange(K + 1)) / (2 * K))
    remaining = list(np.sort(pts))
    order = [remaining.pop()]  # largest, i.e. 1.0
    logprod = np.log(np.abs(np.array(remaining) - order[0]))
    while remaining:
        best = logprod.max()
        ok = np.flatnonzero(logprod >= best - _TIE_RTOL * max(1.0, abs(best)))
        j = int(ok[0])  # remaining is ascending: first is smallest
        g = remaining.pop(j)
        logprod = np.delete(logprod, j)
        order.append(g)
        if remaining:
            logprod = logprod + np.log(np.abs(np.array(remaining) - g))
    return GeneratingNodes(np.array(order))


def node_for_index(alpha, gen: GeneratingNodes) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=np.int64)
    if alpha.min(initial=0) < 0 or alpha.max(initial=0) > gen.K:
        raise ValueError(f"multi-index {tuple(alpha)} needs exponents <= K={gen.K}")
    return gen.nodes[alpha].copy()


def nodes_for_indices(indices, gen: GeneratingNodes) -> np.ndarray:
    """Unisolvent nodes for a sequence of multi-indices, one row each."""
    E = np.asarray(indices, dtype=np.int64)
    if E.size and (E.min() < 0 or E.max() > gen.K):
        raise ValueError(f"multi-index exponent exceeds K={gen.K}")
    return gen.nodes[E]


def random_uniform_points(m: int, n: int, rng_seed: int) -> np.ndarray:
    rng = np.random.default_rng(rng_seed)
    return rng.uniform(-1.0, 1.0, size=(n, m))


def sobol_points(m: int, n: int) -> np.ndarray:
    """First ``n`` unscrambled Sobol points after the origin, mapped to [-1, 1]^m."""
    if not 1 <= m <= MAX_SOBOL_DIMENSION:
        raise ValueError(f"Sobol points are supported for 1 <= m <= {MAX_SOBOL_DIMENSION}, got {m}")
    if n == 0:
        return np.empty((0, m))
    engine = qmc.Sobol(d=m, scramble=False)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        u = engine.random(n + 1)[1:]
    return 2.0 * u - 1.0


def chebyshev_seed(m: int, n: int, gen: GeneratingNodes) -> np.ndarray:
    """Unisolvent nodes of the ``n`` graded-lex smallest multi-indices of N^m."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return nodes_for_indices(graded_lex_indices(m, n), gen)
