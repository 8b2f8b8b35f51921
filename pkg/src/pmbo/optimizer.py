"""The PMBO loop: seed, fit, acquire, evaluate, enlarge.

Each step adds the frontier multi-index whose unisolvent node has the lowest
acquisition score, evaluates the objective there, optionally evaluates the
minimizer of the current surrogate, and refits the surrogate plus its
bootstrap ensemble on everything seen so far.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .acquisition import AcquisitionConfig, FrontierExhausted, gamma_at, select_next_index
from .baselines import cmaes_run
from .multiindex import DEFAULT_MAX_EXPONENT, MultiIndexSet, add_index, total_degree_set
from .sampling import (
    GeneratingNodes,
    SeedConfig,
    chebyshev_seed,
    leja_chebyshev_nodes,
    nodes_for_indices,
    random_uniform_points,
    sobol_points,
)
from .surrogate import (
    BootstrapEnsemble,
    PolynomialSurrogate,
    SampleSet,
    bootstrap_fit,
    fit_with_fallback,
)
from .trace import RunTrace

log = logging.getLogger(__name__)

__all__ = [
    "PmboConfig",
    "OptimizerState",
    "initial_degree",
    "initialize",
    "step",
    "run",
    "surrogate_minimize",
    "DUPLICATE_RADIUS",
]

DUPLICATE_RADIUS = 1e-9
OVERSAMPLING = 1.5


@dataclass(frozen=True)
class PmboConfig:
    seed: SeedConfig = field(default_factory=SeedConfig)
    initial_degree_cap: Optional[int] = None
    degree_norm: float = 1
    acquisition: AcquisitionConfig = field(default_factory=AcquisitionConfig)
    bootstrap_B: int = 20
    ridge: float = 0.0
    exploit_model_optimum: bool = True
    minimize_restarts: int = 16
    max_evaluations: int = 300
    convergence_tol: float = 1e-8
    convergence_patience: int = 30
    max_exponent: int = DEFAULT_MAX_EXPONENT
    rng_seed: int = 0

    def __post_init__(self):
        # equality is allowed: a budget equal to the seed just fits the seed
        if self.max_evaluations < self.seed.size:
            raise ValueError("max_evaluations must be >= the seed size")
        if self.bootstrap_B < 1:
            raise ValueError("bootstrap_B must be >= 1")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")
        if self.minimize_restarts < 1:
            raise ValueError("minimize_restarts must be >= 1")
        if self.convergence_patience < 1:
            raise ValueError("convergence_patience must be >= 1")

    @property
    def max_iterations(self) -> int:
        per_step = 2 if self.exploit_model_optimum else 1
        return max(1, math.ceil((self.max_evaluations - self.seed.size) / per_step))


@dataclass
class OptimizerState:
    samples: SampleSet
    A: MultiIndexSet
    gen: GeneratingNodes
    surrogate: PolynomialSurrogate
    ensemble: BootstrapEnsemble
    x_best: np.ndarray
    f_best: float
    iteration: int
    trace: RunTrace
    reason: Optional[str] = None

    @property
    def evaluations_used(self) -> int:
        return len(self.samples)


def initial_degree(m: int, seed_size: int, p=1) -> int:
    """Largest ``n`` whose degree-``n`` set has at most ``floor(seed_size / 1.5)`` indices (at least 0)."""
    limit = math.floor(seed_size / OVERSAMPLING)
    n = 0
    while len(total_degree_set(m, n + 1, p)) <= limit:
        n += 1
    return n


def _evaluate(objective, x, samples: SampleSet, trace: RunTrace, origin: str) -> float:
    f = objective(x)
    samples.append(x, f, origin)
    trace.log(x, f, origin)
    return f


def _refit(state_samples, A, gen, config: PmboConfig, iteration: int):
    Q = fit_with_fallback(state_samples, A, gen, config.ridge)
    E = bootstrap_fit(state_samples, A, gen, config.bootstrap_B,
                      rng_seed=(config.rng_seed, iteration, 1), ridge=config.ridge)
    return Q, E


def _seed_points(objective, config: PmboConfig, gen: GeneratingNodes):
    m, sc = objective.dimension, config.seed
    if sc.strategy == "random":
        return random_uniform_points(m, sc.size, sc.rng_seed), None
    if sc.strategy == "chebyshev":
        return chebyshev_seed(m, sc.size, gen), None
    if sc.strategy == "sobol":
        return sobol_points(m, sc.size), None
    # cmaes: the seed is the first evaluations of a fresh CMA-ES run
    tr = cmaes_run(objective, sc.size, sc.rng_seed)
    return tr.X, tr.f


def initialize(objective, config: PmboConfig) -> OptimizerState:
    m = objective.dimension
    if m < 1:
        raise ValueError("objective dimension must be >= 1")
    gen = leja_chebyshev_nodes(config.max_exponent)
    X, f = _seed_points(objective, config, gen)
    samples = SampleSet(m)
    trace = RunTrace(m)
    for k, x in enumerate(X):
        if f is None:
            _evaluate(objective, x, samples, trace, "seed")
        else:
            samples.append(x, f[k], "seed")
            trace.log(x, f[k], "seed")
    n0 = config.initial_degree_cap
    if n0 is None:
        n0 = initial_degree(m, config.seed.size, config.degree_norm)
    A = total_degree_set(m, n0, config.degree_norm)
    Q, E = _refit(samples, A, gen, config, 0)
    x_best, f_best = trace.best
    return OptimizerState(samples, A, gen, Q, E, x_best, f_best, 0, trace)


def step(state: OptimizerState, objective, config: PmboConfig) -> OptimizerState:
    """One enlargement of ``A``; mutates and returns ``state``.

    Evaluations that would land within ``DUPLICATE_RADIUS`` of a stored sample
    are skipped (the stored value is reused), and no sub-step exceeds the
    evaluation budget.
    """
    if state.evaluations_used >= config.max_evaluations:
        state.reason = "budget"
        return state
    gamma = gamma_at(config.acquisition, state.iteration, config.max_iterations)
    try:
        alpha, p = select_next_index(state.A, state.gen, state.ensemble, gamma)
    except FrontierExhausted:
        state.reason = "budget"
        return state
    if state.samples.find(p, DUPLICATE_RADIUS) is None:
        _evaluate(objective, p, state.samples, state.trace, "frontier")
    state.A = add_index(state.A, alpha, max_exponent=state.gen.K)

    if config.exploit_model_optimum and state.evaluations_used < config.max_evaluations:
        x_hat = surrogate_minimize(state.surrogate, config.minimize_restarts,
                                   rng_seed=(config.rng_seed, state.iteration, 2))
        if state.samples.find(x_hat, DUPLICATE_RADIUS) is None:
            _evaluate(objective, x_hat, state.samples, state.trace, "exploit")

    state.iteration += 1
    state.surrogate, state.ensemble = _refit(state.samples, state.A, state.gen, config, state.iteration)
    state.x_best, state.f_best = state.trace.best
    return state


def _converged(state: OptimizerState, config: PmboConfig) -> bool:
    k = config.convergence_patience
    if state.evaluations_used < config.seed.size + k:
        return False
    best = state.trace.best_so_far
    return best[-1 - k] - best[-1] < config.convergence_tol


def run(objective, config: PmboConfig = PmboConfig()) -> RunTrace:
    """Run PMBO until the evaluation budget is spent or the incumbent stalls."""
    state = initialize(objective, config)
    while state.reason is None:
        if state.evaluations_used >= config.max_evaluations:
            state.reason = "budget"
        elif _converged(state, config):
            state.reason = "converged"
        else:
            step(state, objective, config)
    log.debug("PMBO stopped after %d evaluations (%s), |A|=%d",
              state.evaluations_used, state.reason, len(state.A))
    state.trace.reason = state.reason
    state.trace.surrogate = state.surrogate
    return state.trace


def surrogate_minimize(Q: PolynomialSurrogate, restarts: int = 16, rng_seed=0,
                       max_iter: int = 200, tol: float = 1e-9) -> np.ndarray:
    """Minimize ``Q`` over [-1, 1]^m by multistart projected gradient descent.

    Starts are the unisolvent node of ``A`` with the smallest ``Q`` value plus
    ``restarts - 1`` uniform random points. Steps are backtracked by halving
    from 1.0 until an Armijo decrease holds; a start stops once the projected
    gradient norm drops to ``tol``. Returns the best point seen.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    m = Q.dimension
    nodes = nodes_for_indices(Q.A.indices, Q.gen)
    node_vals = Q(nodes)
    starts = [nodes[int(np.argmin(node_vals))]]
    if restarts > 1:
        starts.extend(np.random.default_rng(rng_seed).uniform(-1.0, 1.0, size=(restarts - 1, m)))
    X0 = np.array(starts)
    X, vals = kernels.box_pgd(X0, Q.A.exponents, Q.gen.nodes, Q.coeffs, max_iter=max_iter, tol=tol)
    cand = np.vstack([X0, X])
    cand_vals = np.concatenate([Q(X0), vals])
    return cand[int(np.argmin(cand_vals))].copy()
