"""Acceptance criteria 1-10, one PASS/FAIL line each (see the terminal summary).

Criteria 5-7 run the full benchmark protocol: budget 300, 5 repeats with
seeds 0-4, through the experiment harness.
"""
import csv
import json
import shutil
import time
import warnings
from pathlib import Path

import numpy as np
import pytest

from conftest import monomial_eval, random_dc_set
from pmbo.acquisition import acquisition_value, select_next_index
from pmbo.baselines import cmaes_run
from pmbo.benchmarks import HARTMANN3_FSTAR, Objective
from pmbo.harness import ExperimentConfig, run_experiment
from pmbo.multiindex import MultiIndexSet, frontier, total_degree_set
from pmbo.sampling import leja_chebyshev_nodes, node_for_index, nodes_for_indices
from pmbo.surrogate import BootstrapEnsemble, PolynomialSurrogate, SampleSet, bootstrap_fit, ensemble_mean_var, fit

G = leja_chebyshev_nodes(127)
BUDGET, REPEATS = 300, 5


def median_final(out_dir, algorithm):
    summary = json.loads((out_dir / "summary.json").read_text())
    return summary["median_final_best"][algorithm]


def run_protocol(tmp_path_factory, name, objective, algorithms):
    cfg = ExperimentConfig(objective=objective, algorithms=tuple(algorithms), repeats=REPEATS,
                           max_evaluations=BUDGET, rng_seed=0,
                           out_dir=str(tmp_path_factory.mktemp(name)))
    t0 = time.perf_counter()
    run_experiment(cfg, threads=1)
    return cfg, time.perf_counter() - t0


@pytest.fixture(scope="module")
def hartmann_run(tmp_path_factory):
    return run_protocol(tmp_path_factory, "hartmann", "hartmann3", ["pmbo-chebyshev", "random", "sobol"])


@pytest.fixture(scope="module")
def rosenbrock_run(tmp_path_factory):
    return run_protocol(tmp_path_factory, "rosenbrock", "rosenbrock6",
                        ["cmaes", "pmbo-random", "pmbo-sobol", "random"])


@pytest.fixture(scope="module")
def cmaes_seed_run(tmp_path_factory):
    return run_protocol(tmp_path_factory, "cmaes_seed", "hartmann3", ["pmbo-cmaes", "cmaes"])


@pytest.fixture(scope="module")
def sphere_traces():
    sphere = Objective("sphere", 2, [[-1.0, 1.0]] * 2, lambda x: float(np.sum(np.asarray(x) ** 2)))
    return [cmaes_run(sphere, 2000, seed) for seed in range(5)]


def test_criterion_01_surrogate_exactness(acceptance_report):
    rng = np.random.default_rng(2024)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(50):
        m = int(rng.integers(1, 4))
        A = random_dc_set(m, int(rng.integers(1, 36)), rng)
        c = rng.normal(size=len(A))  # random member of Pi_A, monomial coefficients
        P = nodes_for_indices(A.indices, G)
        Q = fit(SampleSet.from_arrays(P, monomial_eval(P, A, c)), A, G)
        X = rng.uniform(-1, 1, (100, m))
        worst = max(worst, float(np.max(np.abs(Q(X) - monomial_eval(X, A, c)))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and elapsed < 10
    acceptance_report(1, ok, f"max error {worst:.2e} (<= 1e-10), {elapsed:.2f} s (< 10 s)")
    assert ok


def _young_diagrams(size):
    """Every downward-closed set of ``size`` indices in m=2 (partitions of size)."""
    def parts(n, cap):
        if n == 0:
            yield ()
            return
        for k in range(min(n, cap), 0, -1):
            for rest in parts(n - k, k):
                yield (k,) + rest
    for lam in parts(size, size):
        yield MultiIndexSet(2, [(i, j) for i, row in enumerate(lam) for j in range(row)])


def test_criterion_02_lagrange_property(acceptance_report):
    worst, count = 0.0, 0
    sets = [MultiIndexSet(1, [(j,) for j in range(n)]) for n in range(1, 21)]
    sets += [A for n in range(1, 21) for A in _young_diagrams(n)]
    for A in sets:
        P = nodes_for_indices(A.indices, G)
        vals = np.empty((len(A), len(A)))
        for b in range(len(A)):
            Q = fit(SampleSet.from_arrays(P, np.eye(len(A))[b]), A, G)
            vals[:, b] = Q(P)
        worst = max(worst, float(np.max(np.abs(vals - np.eye(len(A))))))
        count += 1
    ok = worst <= 1e-10
    acceptance_report(2, ok, f"{count} sets (all |A| <= 20, m <= 2), max |L_a(p_b) - delta| {worst:.2e} (<= 1e-10)")
    assert ok


def test_criterion_03_gradient_oracle(acceptance_report):
    rng = np.random.default_rng(7)
    worst, h = 0.0, 1e-6
    for m in (1, 3, 6):
        for n in range(0, 6):
            for A in (total_degree_set(m, n), random_dc_set(m, min(len(total_degree_set(m, n)), 12), rng)):
                if A.max_exponent() > 5:
                    continue
                Q = PolynomialSurrogate(A, G, rng.normal(size=len(A)))
                X = rng.uniform(-0.99, 0.99, (20, m))
                g = Q.gradient(X)
                fd = np.empty_like(g)
                for i in range(m):
                    e = np.zeros(m)
                    e[i] = h
                    fd[:, i] = (Q(X + e) - Q(X - e)) / (2 * h)
                scale = np.maximum(np.linalg.norm(g, axis=1), 1.0)
                worst = max(worst, float(np.max(np.linalg.norm(g - fd, axis=1) / scale)))
    ok = worst <= 1e-6
    acceptance_report(3, ok, f"max relative FD error {worst:.2e} (<= 1e-6), degree <= 5, m in 1/3/6")
    assert ok


def test_criterion_04_acquisition_invariants(acceptance_report):
    rng = np.random.default_rng(11)
    mono = shift = ties = True
    for trial in range(60):
        m = int(rng.integers(1, 4))
        n = int(rng.integers(m + 2, 40))
        X = rng.uniform(-1, 1, (n, m))
        f = rng.normal(size=n) * 10 ** rng.uniform(-3, 3)
        A = random_dc_set(m, int(rng.integers(1, max(2, n // 2))), rng)
        B = int(rng.integers(2, 12))
        E = bootstrap_fit(SampleSet.from_arrays(X, f), A, G, B=B, rng_seed=trial)
        # monotone in gamma wherever var > 0
        nodes = np.array([node_for_index(a, G) for a in frontier(A)])
        mean, var = ensemble_mean_var(E, nodes)
        g1, g2 = np.sort(rng.uniform(0, 1, 2))
        a1, a2 = acquisition_value(mean, var, g1), acquisition_value(mean, var, g2)
        mono &= bool(np.all(a2 <= a1) and np.all((a2 < a1)[var * (g2 - g1) > 1e-9 * np.maximum(1, np.abs(mean))]))
        # constant shift with the same bootstrap seed
        c = rng.uniform(-1e3, 1e3)
        E2 = bootstrap_fit(SampleSet.from_arrays(X, f + c), A, G, B=B, rng_seed=trial)
        gamma = float(rng.uniform(0, 1))
        shift &= select_next_index(A, G, E, gamma)[0] == select_next_index(A, G, E2, gamma)[0]
        # tie-break: repeated calls agree, and an all-tied ensemble picks the first frontier index
        ties &= select_next_index(A, G, E, gamma)[0] == select_next_index(A, G, E, gamma)[0]
        consts = rng.normal(size=B)  # members constant in x: exact ties with var > 0
        flat = BootstrapEnsemble(tuple(PolynomialSurrogate(A, G, np.r_[v, np.zeros(len(A) - 1)]) for v in consts))
        ties &= select_next_index(A, G, flat, gamma)[0] == frontier(A)[0]
    ok = mono and shift and ties
    acceptance_report(4, ok, f"60 randomized ensembles: monotone={mono}, shift-invariant={shift}, tie-break={ties}")
    assert ok


def test_criterion_05_hartmann_ordinal(acceptance_report, hartmann_run):
    cfg, elapsed = hartmann_run
    out = Path(cfg.out_dir)
    pm, rs, sb = (median_final(out, a) for a in ("pmbo-chebyshev", "random", "sobol"))
    ok = pm <= rs and pm <= sb and pm <= -3.6 and elapsed < 120
    acceptance_report(5, ok, f"PMBO-Chebyshev {pm:.5f} vs random {rs:.5f}, sobol {sb:.5f}; "
                             f"gap to f* {pm - HARTMANN3_FSTAR:.2e} (bound -3.6); {elapsed:.1f} s (< 120 s)")
    assert ok


def test_criterion_06_rosenbrock_ordinal(acceptance_report, rosenbrock_run):
    cfg, elapsed = rosenbrock_run
    out = Path(cfg.out_dir)
    cm, pr, ps, rs = (median_final(out, a) for a in ("cmaes", "pmbo-random", "pmbo-sobol", "random"))
    ok = cm <= pr and pr <= rs and ps <= rs and elapsed < 300
    acceptance_report(6, ok, f"cmaes {cm:.4g} <= PMBO-Random {pr:.4g}; PMBO-Random, PMBO-Sobol {ps:.4g} "
                             f"<= random {rs:.4g}; {elapsed:.1f} s (< 300 s)")
    assert ok


def test_criterion_07_cmaes_seeding_soft(acceptance_report, cmaes_seed_run):
    cfg, elapsed = cmaes_seed_run
    out = Path(cfg.out_dir)
    pm, cm = median_final(out, "pmbo-cmaes"), median_final(out, "cmaes")
    margin = pm - cm
    if pm <= cm:
        acceptance_report(7, True, f"PMBO-CMA-ES {pm:.6f} <= cmaes {cm:.6f} (margin {margin:.2e})")
    else:
        # soft criterion: report the margin instead of failing
        acceptance_report(7, "SOFT-FAIL", f"PMBO-CMA-ES {pm:.6f} > cmaes {cm:.6f}, margin {margin:.2e} "
                                          f"on seeds 0-4 (reported, not enforced)")
        warnings.warn(f"soft criterion 7 missed by {margin:.3e}", stacklevel=1)


def test_criterion_08_cmaes_sphere(acceptance_report, sphere_traces):
    finals = [t.best_so_far[-1] for t in sphere_traces]
    hits = sum(f <= 1e-8 for f in finals)
    ok = hits == 5 and all(len(t) == 2000 for t in sphere_traces)
    acceptance_report(8, ok, f"{hits}/5 seeds reach <= 1e-8 within 2000 evals (worst {max(finals):.2e})")
    assert ok


def test_criterion_09_determinism(acceptance_report, tmp_path):
    cfg = ExperimentConfig(objective="hartmann3", algorithms=("pmbo", "pmbo-random", "pmbo-sobol", "pmbo-cmaes",
                                                             "random", "sobol", "cmaes"),
                           repeats=2, max_evaluations=120, out_dir=str(tmp_path / "exp"))
    out = tmp_path / "exp"

    def snapshot():
        return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.suffix in (".csv", ".json")}

    run_experiment(cfg, threads=1)
    first = snapshot()
    shutil.rmtree(out)
    run_experiment(cfg, threads=1)
    second = snapshot()
    shutil.rmtree(out)
    run_experiment(cfg, threads=4)
    third = snapshot()
    ok = first == second == third and len(first) == 15
    acceptance_report(9, ok, f"{len(first)} CSV/JSON files byte-identical over 3 reruns (serial, serial, 4 threads)")
    assert ok


def _csv_runs(out_dir):
    for path in sorted(out_dir.glob("*.csv")):
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        xcols = [k for k in rows[0] if k.startswith("x_")]
        yield (path.name, np.array([[float(r[k]) for k in xcols] for r in rows]),
               np.array([float(r["best_so_far"]) for r in rows]))


def test_criterion_10_budget_and_incumbent(acceptance_report, hartmann_run, rosenbrock_run, cmaes_seed_run,
                                           sphere_traces):
    runs = []
    for cfg, _ in (hartmann_run, rosenbrock_run, cmaes_seed_run):
        runs += [(name, X, b, 300) for name, X, b in _csv_runs(Path(cfg.out_dir))]
    runs += [(f"sphere-{k}", t.X, t.best_so_far, 2000) for k, t in enumerate(sphere_traces)]
    bad = [name for name, X, b, cap in runs
           if not (len(b) <= cap and np.all(np.diff(b) <= 0) and np.all(np.abs(X) <= 1.0))]
    ok = not bad and len(runs) == 50
    acceptance_report(10, ok, f"{len(runs)} runs: budget respected, best_so_far non-increasing, points in cube"
                              + (f"; violations {bad}" if bad else ""))
    assert ok
