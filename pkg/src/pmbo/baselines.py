"""Reference optimizers: random search, Sobol search and a compact CMA-ES.

All optimizers work on the unit cube [-1, 1]^m and return a :class:`RunTrace`
whose length equals the evaluation budget.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .sampling import random_uniform_points, sobol_points
from .trace import RunTrace

__all__ = [
    "CmaesState",
    "cmaes_init",
    "cmaes_ask",
    "cmaes_tell",
    "cmaes_run",
    "default_lambda",
    "random_search",
    "sobol_search",
    "BASELINES",
]

BASELINES = ("random", "sobol", "cmaes")
_EIG_FLOOR = 1e-20


def random_search(objective, budget: int, rng_seed: int = 0) -> RunTrace:
    if budget < 1:
        raise ValueError("budget must be >= 1")
    trace = RunTrace(objective.dimension)
    for x in random_uniform_points(objective.dimension, budget, rng_seed):
        trace.log(x, objective(x), "sample")
    return trace


def sobol_search(objective, budget: int) -> RunTrace:
    if budget < 1:
        raise ValueError("budget must be >= 1")
    trace = RunTrace(objective.dimension)
    for x in sobol_points(objective.dimension, budget):
        trace.log(x, objective(x), "sample")
    return trace


def default_lambda(m: int) -> int:
    return 4 + int(np.floor(3.0 * np.log(m)))


@dataclass(frozen=True)
class CmaesState:
    """Search distribution and strategy constants (Hansen's defaults)."""

    mean: np.ndarray
    sigma: float
    C: np.ndarray
    p_sigma: np.ndarray
    p_c: np.ndarray
    generation: int
    lam: int
    mu: int
    weights: np.ndarray
    mu_eff: float
    c_sigma: float
    d_sigma: float
    c_c: float
    c_1: float
    c_mu: float
    chi_n: float
    B: np.ndarray  # eigenvectors of C
    D: np.ndarray  # sqrt of eigenvalues of C

    @property
    def dimension(self) -> int:
        return self.mean.shape[0]


def _eig_repair(C):
    C = (C + C.T) / 2.0
    vals, vecs = np.linalg.eigh(C)
    vals = np.maximum(vals, _EIG_FLOOR)
    C = (vecs * vals) @ vecs.T
    return (C + C.T) / 2.0, vecs, np.sqrt(vals)


def cmaes_init(m: int, mean=None, sigma: float = 0.3, lam: int | None = None) -> CmaesState:
    lam = default_lambda(m) if lam is None else int(lam)
    mu = lam // 2
    w = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
    w = w / w.sum()
    mu_eff = 1.0 / np.sum(w ** 2)
    c_c = (4.0 + mu_eff / m) / (m + 4.0 + 2.0 * mu_eff / m)
    c_sigma = (mu_eff + 2.0) / (m + mu_eff + 5.0)
    c_1 = 2.0 / ((m + 1.3) ** 2 + mu_eff)
    c_mu = min(1.0 - c_1, 2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((m + 2.0) ** 2 + mu_eff))
    d_sigma = 1.0 + 2.0 * max(0.0, np.sqrt((mu_eff - 1.0) / (m + 1.0)) - 1.0) + c_sigma
    chi_n = np.sqrt(m) * (1.0 - 1.0 / (4.0 * m) + 1.0 / (21.0 * m * m))
    mean = np.zeros(m) if mean is None else np.array(mean, dtype=np.float64)
    return CmaesState(
        mean=mean, sigma=float(sigma), C=np.eye(m), p_sigma=np.zeros(m), p_c=np.zeros(m),
        generation=0, lam=lam, mu=mu, weights=w, mu_eff=float(mu_eff), c_sigma=float(c_sigma),
        d_sigma=float(d_sigma), c_c=float(c_c), c_1=float(c_1), c_mu=float(c_mu),
        chi_n=float(chi_n), B=np.eye(m), D=np.ones(m),
    )


def cmaes_ask(state: CmaesState, rng: np.random.Generator) -> np.ndarray:
    """Draw ``lam`` candidates ``mean + sigma * C^{1/2} z`` and clip them to the cube."""
    z = rng.standard_normal((state.lam, state.dimension))
    y = (z * state.D) @ state.B.T
    return np.clip(state.mean + state.sigma * y, -1.0, 1.0)


def cmaes_tell(state: CmaesState, points, values) -> CmaesState:
    """Rank-one plus rank-mu update with cumulative step-size adaptation.

    Ranking is stable, so equal values keep their ask order.
    """
    X = np.asarray(points, dtype=np.float64)
    f = np.asarray(values, dtype=np.float64)
    if X.shape[0] != state.lam or f.shape[0] != state.lam:
        raise ValueError(f"tell needs exactly lambda={state.lam} points and values")
    if not np.all(np.isfinite(f)):
        raise ValueError("cmaes_tell received non-finite objective values")
    m = state.dimension
    order = np.argsort(f, kind="stable")
    sel = X[order[: state.mu]]
    old = state.mean
    mean = state.weights @ sel
    y_w = (mean - old) / state.sigma

    inv_sqrt_C = (state.B / state.D) @ state.B.T
    cs, cc = state.c_sigma, state.c_c
    p_sigma = (1 - cs) * state.p_sigma + np.sqrt(cs * (2 - cs) * state.mu_eff) * (inv_sqrt_C @ y_w)
    gen = state.generation + 1
    ps_norm = np.linalg.norm(p_sigma)
    h_sigma = ps_norm / np.sqrt(1 - (1 - cs) ** (2 * gen)) / state.chi_n < 1.4 + 2.0 / (m + 1)
    p_c = (1 - cc) * state.p_c + h_sigma * np.sqrt(cc * (2 - cc) * state.mu_eff) * y_w

    Y = (sel - old) / state.sigma
    rank_mu = (Y * state.weights[:, None]).T @ Y
    c1, cmu = state.c_1, state.c_mu
    C = ((1 - c1 - cmu) * state.C
         + c1 * (np.outer(p_c, p_c) + (1 - h_sigma) * cc * (2 - cc) * state.C)
         + cmu * rank_mu)
    C, B, D = _eig_repair(C)
    sigma = state.sigma * np.exp((cs / state.d_sigma) * (ps_norm / state.chi_n - 1.0))
    sigma = max(float(sigma), np.finfo(float).tiny)
    return dataclasses.replace(
        state, mean=mean, sigma=sigma, C=C, p_sigma=p_sigma, p_c=p_c,
        generation=gen, B=B, D=D,
    )


def cmaes_run(objective, budget: int, rng_seed: int = 0, sigma0: float = 0.3) -> RunTrace:
    """CMA-ES from the origin until exactly ``budget`` evaluations are spent.

    The last generation may be cut short; its points are evaluated and logged
    but never told.
    """
    m = objective.dimension
    state = cmaes_init(m, sigma=sigma0)
    if budget < state.lam:
        raise ValueError(f"budget {budget} is smaller than the population size {state.lam}")
    rng = np.random.default_rng(rng_seed)
    trace = RunTrace(m)
    while len(trace) < budget:
        X = cmaes_ask(state, rng)
        take = min(state.lam, budget - len(trace))
        vals = []
        for x in X[:take]:
            vals.append(objective(x))
            trace.log(x, vals[-1], "sample")
        if take == state.lam:
            state = cmaes_tell(state, X, vals)
    return trace
