"""Polynomial-model-based optimization (PMBO) for blackbox objectives on boxes.

A polynomial surrogate over a downward-closed multi-index set is refit after
every evaluation and grown one multi-index at a time, guided by a bootstrap
mean-minus-variance acquisition over the frontier nodes.
"""
from .acquisition import AcquisitionConfig, acquisition_value, gamma_at, select_next_index
from .baselines import cmaes_run, random_search, sobol_search
from .benchmarks import Objective, get_objective
from .kernels import BACKEND
from .multiindex import MultiIndexSet, add_index, frontier, is_downward_closed, total_degree_set
from .optimizer import PmboConfig, initialize, run, step, surrogate_minimize
from .sampling import SeedConfig, leja_chebyshev_nodes
from .surrogate import PolynomialSurrogate, SampleSet, bootstrap_fit, fit
from .trace import RunTrace

__version__ = "0.1.0"

__all__ = [
    "AcquisitionConfig", "acquisition_value", "gamma_at", "select_next_index",
    "cmaes_run", "random_search", "sobol_search",
    "Objective", "get_objective", "BACKEND",
    "MultiIndexSet", "add_index", "frontier", "is_downward_closed", "total_degree_set",
    "PmboConfig", "initialize", "run", "step", "surrogate_minimize",
    "SeedConfig", "leja_chebyshev_nodes",
    "PolynomialSurrogate", "SampleSet", "bootstrap_fit", "fit", "RunTrace",
]
