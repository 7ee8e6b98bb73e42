"""Command-line front end.

    clebsch run --config FILE [--out DIR] [--experiment NAME]
    clebsch convergence --config FILE
    clebsch closure-check [--samples N]

Exit codes: 0 success, 1 configuration or usage error, 2 solver failure.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import __version__
from .config import EXPERIMENTS, ExperimentConfig, parse_config
from .discrete_integrators import ConvergenceError
from .exceptions import ConfigError, DomainError, SolverConvergenceError
from .experiments import RUNNERS, run_closure_check, run_convergence, run_experiment
from .kernels import BACKEND

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_SOLVER = 2

FLOAT_FORMAT = "%.17g"


def _fmt(v):
    if isinstance(v, float):
        return FLOAT_FORMAT % v
    return str(v)


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([FLOAT_FORMAT % x for x in row])


def write_summary(path, summary):
    with open(path, "w") as fh:
        for key, value in summary.items():
            fh.write(f"{key}: {_fmt(value)}\n")


def _load_config(path, experiment=None, default_experiment=None):
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"config {path} is not valid UTF-8") from None
    return parse_config(text, experiment=experiment, default_experiment=default_experiment)


def _err(msg):
    print(f"error: {msg}", file=sys.stderr)


def cmd_run(args):
    try:
        cfg = _load_config(args.config, args.experiment)
        if cfg.experiment not in RUNNERS:
            raise ConfigError(
                f"experiment {cfg.experiment!r} has no trajectory; use the "
                f"{cfg.experiment} command instead",
                key="experiment",
            )
        out = Path(args.out if args.out is not None else cfg.output_path)
    except ConfigError as exc:
        _err(exc)
        return EXIT_CONFIG

    traj_path = out / "trajectory.csv"
    summary_path = out / "summary.txt"
    try:
        result = run_experiment(cfg)
    except (SolverConvergenceError, DomainError) as exc:
        _err(f"solver failure: {exc}")
        return EXIT_SOLVER
    except ConfigError as exc:
        _err(exc)
        return EXIT_CONFIG

    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        written.append(traj_path)
        write_csv(traj_path, result.columns, result.rows)
        written.append(summary_path)
        write_summary(summary_path, {**result.summary, "backend": BACKEND})
    except BaseException:
        for p in written:
            try:
                os.remove(p)
            except FileNotFoundError:
                pass
        raise
    print(f"wrote {traj_path} ({len(result.rows)} rows) and {summary_path}")
    return EXIT_OK


def cmd_convergence(args):
    try:
        cfg = _load_config(args.config, default_experiment="convergence")
        if cfg.experiment == "closure-check":
            raise ConfigError("closure-check has no convergence study", key="experiment")
        result, desc = run_convergence(cfg)
    except (ConfigError, ConvergenceError, ValueError) as exc:
        _err(exc)
        return EXIT_CONFIG
    except (SolverConvergenceError, DomainError) as exc:
        _err(f"solver failure: {exc}")
        return EXIT_SOLVER
    print(f"scheme: {cfg.scheme} ({desc})")
    print(result.table())
    return EXIT_OK


def cmd_closure_check(args):
    try:
        seed = ExperimentConfig().resolved_seed()
    except ConfigError as exc:
        _err(exc)
        return EXIT_CONFIG
    good, bad = run_closure_check(seed=seed, n=args.samples)
    status = "PASS" if good.passed() else "FAIL"
    print(f"right multiplication on SO(3): max residual {good.max_residual:.3e} over {good.n_samples} samples [{status}]")
    print(f"corrupted bracket uv + vu (negative control): max residual {bad.max_residual:.3e}")
    return EXIT_OK if good.passed() else EXIT_SOLVER


def build_parser():
    parser = argparse.ArgumentParser(prog="clebsch", description="Clebsch-variational integrators on SO(3) and EPDiff particles")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="integrate one experiment and write trajectory.csv and summary.txt")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="output directory (overrides output_path)")
    p.add_argument("--experiment", choices=[e for e in EXPERIMENTS if e in RUNNERS], default=None)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("convergence", help="print an error table and fitted order")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("closure-check", help="check bracket closure of the velocity map")
    p.add_argument("--samples", type=int, default=100)
    p.set_defaults(func=cmd_closure_check)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses 2 for usage errors; that code is reserved for solver failures
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
