"""Benchmark sweeps over algorithms x repeats, with CSV/JSON/SVG outputs.

Output layout of :func:`run_experiment` inside ``out_dir``::

    <algorithm>_r<repeat>.csv   one trace per run
    summary.json                config echo, per-run results, final medians
    convergence.svg             median best-so-far with min/max band
"""
from __future__ import annotations

import configparser
import csv
import io
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np

from .acquisition import AcquisitionConfig
from .baselines import cmaes_run, random_search, sobol_search
from .benchmarks import get_objective
from .optimizer import PmboConfig, run as pmbo_run
from .sampling import SEED_STRATEGIES, SeedConfig
from .trace import RunTrace

log = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "AggregateResult",
    "ALGORITHMS",
    "load_config",
    "run_algorithm",
    "run_experiment",
    "aggregate",
    "emit_plot",
    "write_trace_csv",
    "read_trace_csvs",
    "plot_directory",
]

ALGORITHMS = ("pmbo", "pmbo-random", "pmbo-chebyshev", "pmbo-sobol", "pmbo-cmaes", "random", "sobol", "cmaes")


class ConfigError(ValueError):
    """Invalid experiment configuration or unknown objective/algorithm name."""


@dataclass(frozen=True)
class ExperimentConfig:
    objective: str
    algorithms: tuple
    repeats: int = 5
    max_evaluations: int = 300
    seed_strategy: str = "chebyshev"
    seed_size: int = 50
    gamma: float = 0.5
    gamma_schedule: str = "constant"
    decay_end: float = 0.0
    bootstrap_B: int = 20
    exploit_model_optimum: bool = True
    convergence_patience: int = 30
    convergence_tol: float = 1e-8
    rng_seed: int = 0
    out_dir: str = "results"

    def __post_init__(self):
        algos = tuple(self.algorithms)
        object.__setattr__(self, "algorithms", algos)
        if not algos:
            raise ConfigError("algorithm list must not be empty")
        for a in algos:
            if a not in ALGORITHMS:
                raise ConfigError(f"unknown algorithm {a!r}; choose from {', '.join(ALGORITHMS)}")
        if len(set(algos)) != len(algos):
            raise ConfigError("algorithm list has duplicates")
        if self.repeats < 1:
            raise ConfigError("repeats must be >= 1")
        if self.max_evaluations < 1:
            raise ConfigError("max_evaluations must be >= 1")
        if self.seed_strategy not in SEED_STRATEGIES:
            raise ConfigError(f"unknown seed_strategy {self.seed_strategy!r}")
        try:
            get_objective(self.objective)
        except (KeyError, ValueError) as exc:
            raise ConfigError(str(exc)) from None

    def pmbo_config(self, strategy: str, rng_seed: int) -> PmboConfig:
        try:
            return PmboConfig(
                seed=SeedConfig(strategy, self.seed_size, rng_seed),
                acquisition=AcquisitionConfig(self.gamma, self.gamma_schedule, self.decay_end),
                bootstrap_B=self.bootstrap_B,
                exploit_model_optimum=self.exploit_model_optimum,
                max_evaluations=self.max_evaluations,
                convergence_tol=self.convergence_tol,
                convergence_patience=self.convergence_patience,
                rng_seed=rng_seed,
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from None


_INT_KEYS = {"repeats", "max_evaluations", "seed_size", "bootstrap_B", "convergence_patience", "rng_seed"}
_FLOAT_KEYS = {"gamma", "decay_end", "convergence_tol"}
_BOOL_KEYS = {"exploit_model_optimum"}
_STR_KEYS = {"objective", "seed_strategy", "gamma_schedule", "out_dir"}


def load_config(path) -> ExperimentConfig:
    """Read a flat ``key = value`` file (``#`` comments, optional ``[experiment]`` header).

    ``out_dir`` is resolved relative to the config file.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if not text.lstrip().startswith("["):
        text = "[experiment]\n" + text
    cp = configparser.ConfigParser(inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    if len(cp.sections()) != 1:
        raise ConfigError("config must be flat: a single section of key = value lines")
    raw = dict(cp[cp.sections()[0]])
    kw = {}
    for key, value in raw.items():
        try:
            if key == "algorithms":
                kw[key] = tuple(a.strip() for a in value.split(",") if a.strip())
            elif key in _INT_KEYS:
                kw[key] = int(value)
            elif key in _FLOAT_KEYS:
                kw[key] = float(value)
            elif key in _BOOL_KEYS:
                kw[key] = cp[cp.sections()[0]].getboolean(key)
            elif key in _STR_KEYS:
                kw[key] = value.strip()
            else:
                raise ConfigError(f"unknown config key {key!r}")
        except ValueError as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad value for {key!r}: {value!r}") from None
    for required in ("objective", "algorithms"):
        if required not in kw:
            raise ConfigError(f"config is missing {required!r}")
    if "out_dir" in kw and not os.path.isabs(kw["out_dir"]):
        kw["out_dir"] = str(path.parent / kw["out_dir"])
    return ExperimentConfig(**kw)


def run_algorithm(name: str, objective, config: ExperimentConfig, rng_seed: int) -> RunTrace:
    if name == "random":
        return random_search(objective, config.max_evaluations, rng_seed)
    if name == "sobol":
        return sobol_search(objective, config.max_evaluations)
    if name == "cmaes":
        return cmaes_run(objective, config.max_evaluations, rng_seed)
    if name.startswith("pmbo"):
        strategy = config.seed_strategy if name == "pmbo" else name.split("-", 1)[1]
        return pmbo_run(objective, config.pmbo_config(strategy, rng_seed))
    raise ConfigError(f"unknown algorithm {name!r}")


@dataclass
class AggregateResult:
    """Per-algorithm median and min/max band of best-so-far, per evaluation index."""

    median: dict = field(default_factory=dict)
    lower: dict = field(default_factory=dict)
    upper: dict = field(default_factory=dict)

    @property
    def algorithms(self) -> list:
        return list(self.median)


def _lower_median(values: np.ndarray) -> np.ndarray:
    # lower-middle element for even counts: no averaging
    s = np.sort(values, axis=0)
    return s[(s.shape[0] - 1) // 2]


def aggregate(traces, algorithm: str = "run", into: AggregateResult | None = None) -> AggregateResult:
    """Element-wise median/min/max of best-so-far over equally long traces."""
    curves = [t.best_so_far if isinstance(t, RunTrace) else np.asarray(t, dtype=np.float64) for t in traces]
    if not curves:
        raise ValueError("aggregate needs at least one trace")
    if len({c.shape[0] for c in curves}) != 1:
        raise ValueError("traces differ in length")
    M = np.vstack(curves)
    res = into if into is not None else AggregateResult()
    res.median[algorithm] = _lower_median(M)
    res.lower[algorithm] = M.min(axis=0)
    res.upper[algorithm] = M.max(axis=0)
    return res


def padded_best(trace: RunTrace, length: int) -> np.ndarray:
    """Best-so-far curve carried forward to ``length`` (runs may stop early)."""
    b = trace.best_so_far
    if b.shape[0] >= length:
        return b[:length]
    return np.concatenate([b, np.full(length - b.shape[0], b[-1])])


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def trace_csv_text(trace: RunTrace, run_id: str, algorithm: str) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run_id", "algorithm", "eval_index", "origin"]
               + [f"x_{i + 1}" for i in range(trace.dimension)] + ["f", "best_so_far"])
    for r in trace.records:
        w.writerow([run_id, algorithm, r.eval_index, r.origin] + [_fmt(v) for v in r.x]
                   + [_fmt(r.f), _fmt(r.best_so_far)])
    return buf.getvalue()


def write_trace_csv(trace: RunTrace, path, run_id: str, algorithm: str) -> None:
    Path(path).write_text(trace_csv_text(trace, run_id, algorithm))


def read_trace_csvs(directory) -> dict:
    """``{algorithm: [best_so_far arrays in run_id order]}`` from every trace CSV in ``directory``."""
    out: dict = {}
    files = sorted(Path(directory).glob("*.csv"))
    if not files:
        raise FileNotFoundError(f"no trace CSVs in {directory}")
    for path in files:
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        if not rows or "best_so_far" not in rows[0]:
            continue
        out.setdefault(rows[0]["algorithm"], []).append(
            np.array([float(r["best_so_far"]) for r in rows]))
    return out


def _run_one(job):
    config, algorithm, repeat = job
    objective = get_objective(config.objective)
    seed = config.rng_seed + repeat
    return algorithm, repeat, seed, run_algorithm(algorithm, objective, config, seed)


def run_experiment(config: ExperimentConfig, threads: int | None = None) -> AggregateResult:
    """Run every (algorithm, repeat) pair and write traces, summary and plot.

    Repeat ``r`` uses seed ``config.rng_seed + r``. ``threads`` defaults to
    the ``PMBO_THREADS`` environment variable (serial when unset). Files are
    written after all runs finish, in run order, so outputs are deterministic.
    """
    out = Path(config.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise ConfigError(f"output directory {out} is not writable")
    if threads is None:
        threads = int(os.environ.get("PMBO_THREADS", "1") or 1)
    jobs = [(config, a, r) for a in config.algorithms for r in range(config.repeats)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_one, jobs))
    else:
        results = [_run_one(j) for j in jobs]

    agg = AggregateResult()
    runs = []
    for algorithm in config.algorithms:
        mine = [(r, s, t) for a, r, s, t in results if a == algorithm]
        curves = []
        for repeat, seed, trace in mine:
            run_id = f"{algorithm}-r{repeat}"
            write_trace_csv(trace, out / f"{algorithm}_r{repeat}.csv", run_id, algorithm)
            x_best, f_best = trace.best
            entry = {
                "run_id": run_id,
                "algorithm": algorithm,
                "repeat": repeat,
                "rng_seed": seed,
                "evaluations_used": len(trace),
                "reason": trace.reason,
                "final_best": float(trace.best_so_far[-1]),
                "x_best": [float(v) for v in x_best],
            }
            if trace.surrogate is not None:
                entry["surrogate"] = trace.surrogate.to_dict()
            runs.append(entry)
            curves.append(padded_best(trace, config.max_evaluations))
        aggregate(curves, algorithm, into=agg)
        log.info("%s: median final best %.6g", algorithm, agg.median[algorithm][-1])

    summary = {
        "config": asdict(config),
        "runs": runs,
        "median_final_best": {a: float(agg.median[a][-1]) for a in agg.algorithms},
    }
    summary["config"]["algorithms"] = list(config.algorithms)
    (out / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    emit_plot(agg, out / "convergence.svg", title=config.objective)
    return agg


_PALETTE = ("#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f")


def emit_plot(result: AggregateResult, path, title: str = "") -> None:
    """Write an SVG of the median best-so-far curves with min/max bands.

    The y axis is logarithmic when every plotted value is positive.
    """
    if not result.algorithms:
        raise ValueError("nothing to plot: the result has no algorithms")
    W, H, L, R, T, Bm = 720, 440, 80, 170, 30, 50
    pw, ph = W - L - R, H - T - Bm
    allv = np.concatenate([np.concatenate([result.lower[a], result.upper[a]]) for a in result.algorithms])
    log_y = bool(np.all(allv > 0))
    yv = np.log10(allv) if log_y else allv
    ylo, yhi = float(yv.min()), float(yv.max())
    if yhi - ylo < 1e-12:
        ylo, yhi = ylo - 0.5, yhi + 0.5
    n = max(len(result.median[a]) for a in result.algorithms)
    xmax = max(n - 1, 1)

    def px(i):
        return L + pw * i / xmax

    def py(v):
        v = math.log10(v) if log_y else v
        return T + ph * (1.0 - (v - ylo) / (yhi - ylo))

    def pts(xs, ys):
        return " ".join(f"{px(i):.2f},{py(v):.2f}" for i, v in zip(xs, ys))

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">',
        f'<rect x="0" y="0" width="{W}" height="{H}" fill="white"/>',
        f'<rect x="{L}" y="{T}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    if title:
        parts.append(f'<text x="{L + pw / 2:.1f}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>')
    for k in range(5):
        v = ylo + (yhi - ylo) * k / 4
        y = T + ph * (1.0 - k / 4)
        label = f"{10 ** v:.3g}" if log_y else f"{v:.3g}"
        parts.append(f'<text x="{L - 6}" y="{y + 4:.1f}" text-anchor="end" font-size="11">{label}</text>')
        x = L + pw * k / 4
        parts.append(f'<text x="{x:.1f}" y="{T + ph + 16}" text-anchor="middle" font-size="11">{round(xmax * k / 4)}</text>')
    parts.append(f'<text x="{L + pw / 2:.1f}" y="{H - 10}" text-anchor="middle" font-size="12">evaluation</text>')
    ylab = "best so far (log)" if log_y else "best so far"
    parts.append(f'<text x="16" y="{T + ph / 2:.1f}" text-anchor="middle" font-size="12" '
                 f'transform="rotate(-90 16 {T + ph / 2:.1f})">{ylab}</text>')
    for j, a in enumerate(result.algorithms):
        color = _PALETTE[j % len(_PALETTE)]
        med, lo, hi = result.median[a], result.lower[a], result.upper[a]
        idx = list(range(len(med)))
        band = pts(idx, hi) + " " + pts(idx[::-1], lo[::-1])
        parts.append(f'<polygon points="{band}" fill="{color}" fill-opacity="0.2" stroke="none"/>')
        parts.append(f'<polyline points="{pts(idx, med)}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        ly = T + 14 + 18 * j
        parts.append(f'<line x1="{L + pw + 12}" y1="{ly}" x2="{L + pw + 32}" y2="{ly}" stroke="{color}" stroke-width="2"/>')
        parts.append(f'<text x="{L + pw + 38}" y="{ly + 4}" font-size="12">{escape(a)}</text>')
    parts.append("</svg>")
    try:
        Path(path).write_text("\n".join(parts) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write plot to {path}: {exc}") from exc


def plot_directory(in_dir, out_path) -> AggregateResult:
    """Aggregate every trace CSV under ``in_dir`` and plot it."""
    curves = read_trace_csvs(in_dir)
    agg = AggregateResult()
    for algorithm in curves:
        n = max(c.shape[0] for c in curves[algorithm])
        padded = [np.concatenate([c, np.full(n - c.shape[0], c[-1])]) for c in curves[algorithm]]
        aggregate(padded, algorithm, into=agg)
    emit_plot(agg, out_path)
    return agg
