"""Command-line entry point.

Subcommands:
    simulate         run the full multi-run experiment and export CSVs
    field            run one vehicle sequence and export the learned field
    validate-config  parse a config file and echo the effective values
    oracle-check     run the reference cross-checks on toy problems

Exit codes: 0 success, 1 configuration or usage error, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .filtering import augmented_prior
from .harness import export_field, export_results, run_experiment, run_single
from .models import KINEMATIC_DIM
from .oracles import run_oracle_checks
from .scenario import (ScenarioConfig, build_paths, dump_config, initial_covariance,
                       load_config, write_manifest)
from .validation import NumericalError


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpassm",
        description="Vehicle tracking with a jointly learned acceleration field.")
    parser.add_argument("--version", action="version", version=f"gpassm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser(
        "simulate", help="run the experiment and write CSV results")
    simulate.add_argument("--config", required=True, help="TOML config file")
    simulate.add_argument("--out", required=True, help="output directory")
    simulate.add_argument("--seed", type=int, help="override rng_seed")
    simulate.add_argument("--runs", type=int, help="override n_runs")
    simulate.add_argument("--vehicles", type=int, help="override n_vehicles")
    simulate.add_argument(
        "--baseline-only", action="store_true",
        help="disable field learning; the tracker then degenerates to the CV baseline")

    field = sub.add_parser(
        "field", help="run one vehicle sequence and export the learned field")
    field.add_argument("--config", required=True, help="TOML config file")
    field.add_argument("--out", required=True, help="output directory")
    field.add_argument("--after-vehicle", type=int, default=None, metavar="K",
                       help="export the field after K vehicles (default: all; 0 = prior)")

    validate = sub.add_parser("validate-config", help="check a config file")
    validate.add_argument("--config", required=True, help="TOML config file")

    oracle = sub.add_parser("oracle-check", help="run reference cross-checks")
    oracle.add_argument("--seed", type=int, default=0)
    return parser


def _load_with_overrides(args) -> ScenarioConfig:
    config = load_config(args.config)
    overrides = {}
    if getattr(args, "seed", None) is not None:
        overrides["rng_seed"] = args.seed
    if getattr(args, "runs", None) is not None:
        overrides["n_runs"] = args.runs
    if getattr(args, "vehicles", None) is not None:
        overrides["n_vehicles"] = args.vehicles
    if overrides:
        config = dataclasses.replace(config, **overrides)
    return config


def _print_rmse_table(result) -> None:
    """Per-vehicle mean RMSE across runs, then the overall means."""
    n_veh = result.config.n_vehicles
    sums_g = np.zeros(n_veh)
    sums_c = np.zeros(n_veh)
    counts = np.zeros(n_veh)
    for rec in result.all_records():
        sums_g[rec.vehicle - 1] += rec.rmse_gpassm
        sums_c[rec.vehicle - 1] += rec.rmse_cv
        counts[rec.vehicle - 1] += 1
    print(f"{'vehicle':>7}  {'rmse_gpassm':>12}  {'rmse_cv':>12}")
    for v in range(n_veh):
        print(f"{v + 1:>7}  {sums_g[v] / counts[v]:>12.4f}  {sums_c[v] / counts[v]:>12.4f}")
    print(f"{'mean':>7}  {sums_g.sum() / counts.sum():>12.4f}  "
          f"{sums_c.sum() / counts.sum():>12.4f}")


def _cmd_simulate(args) -> int:
    config = _load_with_overrides(args)
    def progress(done, total):
        print(f"run {done}/{total}", file=sys.stderr)
    result = run_experiment(config, learn_field=not args.baseline_only, progress=progress)
    export_results(result, args.out)
    export_field(result.final_belief, result.grid, config, args.out)
    _print_rmse_table(result)
    return 0


def _cmd_field(args) -> int:
    config = _load_with_overrides(args)
    k = args.after_vehicle if args.after_vehicle is not None else config.n_vehicles
    if k < 0 or k > config.n_vehicles:
        raise ValueError(
            f"--after-vehicle must be between 0 and n_vehicles={config.n_vehicles}, got {k}")
    grid = config.build_grid()
    if k > 0:
        _, belief = run_single(config, 0, grid, config.motion_model(), build_paths(config),
                               n_vehicles=k)
    else:
        belief = augmented_prior(grid, np.zeros(KINEMATIC_DIM), initial_covariance(config),
                                 config.drift_var)
    written = export_field(belief, grid, config, args.out)
    write_manifest(config, Path(args.out) / "manifest.toml")
    for path in written:
        print(path)
    return 0


def _cmd_validate_config(args) -> int:
    config = load_config(args.config)
    print(dump_config(config), end="")
    return 0


def _cmd_oracle_check(args) -> int:
    checks = run_oracle_checks(args.seed)
    failed = False
    for check in checks:
        status = "PASS" if check.passed else "FAIL"
        print(f"{status}  {check.name}: {check.detail}")
        failed = failed or not check.passed
    return 2 if failed else 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {
        "simulate": _cmd_simulate,
        "field": _cmd_field,
        "validate-config": _cmd_validate_config,
        "oracle-check": _cmd_oracle_check,
    }
    try:
        return handlers[args.command](args)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
