"""Command line entry point.

    pmbo run --config experiment.cfg
    pmbo optimize --objective hartmann3 --algo pmbo-chebyshev --budget 300 --seed 0
    pmbo plot --in results/ --out results/convergence.svg

Exit status is 0 on success, 1 for configuration errors and 2 for failures
while running.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .benchmarks import get_objective
from .harness import ALGORITHMS, ConfigError, ExperimentConfig, load_config, plot_directory, \
    run_algorithm, run_experiment, trace_csv_text

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pmbo", description="Polynomial-model-based blackbox optimization")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run a full experiment from a config file")
    r.add_argument("--config", required=True)

    o = sub.add_parser("optimize", help="single run; trace CSV to stdout or --out")
    o.add_argument("--objective", required=True)
    o.add_argument("--algo", required=True, choices=ALGORITHMS)
    o.add_argument("--budget", type=int, default=300)
    o.add_argument("--seed", type=int, default=0)
    o.add_argument("--seed-strategy", default="chebyshev")
    o.add_argument("--seed-size", type=int, default=50)
    o.add_argument("--out")

    pl = sub.add_parser("plot", help="plot the trace CSVs in a directory")
    pl.add_argument("--in", dest="in_dir", required=True)
    pl.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            config = load_config(args.config)
            agg = run_experiment(config)
            for a in agg.algorithms:
                print(f"{a}\tmedian final best {agg.median[a][-1]:.10g}")
        elif args.command == "optimize":
            config = ExperimentConfig(
                objective=args.objective, algorithms=(args.algo,), repeats=1,
                max_evaluations=args.budget, seed_strategy=args.seed_strategy,
                seed_size=args.seed_size, rng_seed=args.seed,
            )
            objective = get_objective(args.objective)
            if args.algo.startswith("pmbo"):
                config.pmbo_config(config.seed_strategy, args.seed)  # validate early
            trace = run_algorithm(args.algo, objective, config, args.seed)
            text = trace_csv_text(trace, f"{args.algo}-s{args.seed}", args.algo)
            if args.out:
                with open(args.out, "w") as fh:
                    fh.write(text)
            else:
                sys.stdout.write(text)
        else:
            plot_directory(args.in_dir, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
