from __future__ import annotations

import argparse
import dataclasses
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from osnls.config import ExperimentConfig, load_config, load_environment, log_level, sweep_threads
from osnls.errors import (
    CheckpointFormatError,
    ConfigError,
    InvalidParamsError,
    MissingReportError,
    NumericalFailureError,
    OsnlsError,
    SupercriticalInitialDataError,
)
from osnls.plots import emit_plot_scripts
from osnls.reports import append_run_log
from osnls.suite import run_inequality_suite
from osnls.sweep import run_conservation_check, run_convergence_sweep, run_duhamel_experiment, run_simulation

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="osnls", description="Oscillating-nonlinearity NLS experiments.")
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser("simulate", help="single run: diagnostics CSV and final checkpoint")
    simulate.add_argument("--config", type=Path, required=True)
    simulate.add_argument("--out", type=Path, default=None, help="output directory (default: config output_dir)")
    simulate.add_argument("--omega", type=float, default=None, help="forcing frequency (default: first config omega)")
    simulate.add_argument("--frames", action="store_true", help="also write every saved frame")

    for name, text in (
        ("sweep", "omega-sweep convergence experiment"),
        ("verify-inequalities", "Moser-Trudinger and logarithmic estimate suites"),
        ("duhamel-gap", "averaging gap of the Duhamel integral"),
        ("check-conservation", "mass and Hamiltonian drift table"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", type=Path, required=True)

    plots = sub.add_parser("plots", help="emit plot scripts for report CSVs")
    plots.add_argument("--report", type=Path, action="append", required=True)
    return parser


def _simulate(config: ExperimentConfig, args: argparse.Namespace) -> Tuple[int, str]:
    omega = config.omegas[0] if args.omega is None else args.omega
    trace, paths = run_simulation(config, omega, config.output_dir, save_frames=args.frames)
    if not trace.completed:
        raise NumericalFailureError(f"run ended with status {trace.status} at t = {trace.status_time!r}")
    print(f"omega={omega:g}: {len(trace.diagnostics)} frames, status {trace.status}; wrote {paths['diagnostics']}")
    return len(trace.diagnostics), "success"


def _sweep(config: ExperimentConfig) -> Tuple[int, str]:
    report = run_convergence_sweep(config, threads=sweep_threads())
    completed = sum(1 for r in report.rows if r.completed)
    rate = "n/a" if report.fitted_rate is None else f"{report.fitted_rate:.3f}"
    print(f"{completed}/{len(report.rows)} omega rows completed; fitted rate {rate}; wrote {config.output_dir}")
    if completed == 0:
        raise NumericalFailureError(f"all {len(report.rows)} omega rows failed")
    return len(report.rows), "success"


def _suite(config: ExperimentConfig) -> Tuple[int, str]:
    report = run_inequality_suite(config)
    print(
        f"c_alpha {report.mt_constants}, H1 {report.h1_constant:.6g}, "
        f"C_lambda {report.log_constants}, {report.failures} failed case(s)"
    )
    return len(report.paths), "success"


def _duhamel(config: ExperimentConfig) -> Tuple[int, str]:
    path, rows = run_duhamel_experiment(config)
    print(f"{rows} duhamel gap rows; wrote {path}")
    return rows, "success"


def _conservation(config: ExperimentConfig) -> Tuple[int, str]:
    path, rows = run_conservation_check(config)
    print(f"{rows} conservation rows; wrote {path}")
    return rows, "success"


COMMANDS = {
    "sweep": _sweep,
    "verify-inequalities": _suite,
    "duhamel-gap": _duhamel,
    "check-conservation": _conservation,
}


def main(argv: Optional[List[str]] = None) -> int:
    """CLI entrypoint.
    - Loads environment variables from .env and configures logging.
    - Runs one subcommand and appends a row to <output_dir>/run_log.csv, failed runs included.
    """
    load_environment()
    logging.basicConfig(level=log_level(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)

    status = "success"
    error_message = ""
    rows_written = 0
    exit_code = EXIT_OK
    output_dir = Path("output")

    try:
        if args.command == "plots":
            output_dir = Path(args.report[0]).parent
            scripts = emit_plot_scripts(args.report)
            rows_written = len(scripts)
            print(f"{rows_written} plot script(s) written.")
        else:
            config = load_config(args.config)
            if args.command == "simulate" and args.out is not None:
                config = dataclasses.replace(config, output_dir=args.out)
            output_dir = config.output_dir
            if args.command == "simulate":
                rows_written, status = _simulate(config, args)
            else:
                rows_written, status = COMMANDS[args.command](config)
    except (ConfigError, InvalidParamsError, SupercriticalInitialDataError) as exc:
        status, error_message, exit_code = "failed", str(exc), EXIT_CONFIG
    except (MissingReportError, CheckpointFormatError, OSError) as exc:
        status, error_message, exit_code = "failed", str(exc), EXIT_IO
    except OsnlsError as exc:
        status, error_message, exit_code = "failed", str(exc), EXIT_NUMERICAL
    if error_message:
        print(f"{args.command} failed: {error_message[:500]}")

    # --- run_log (append-only) ----------------------------------------------------
    try:
        append_run_log(output_dir, args.command, status, rows_written, error_message)
    except OSError as exc:
        logger.warning("Could not append to run log in %s: %s", output_dir, exc)
        if exit_code == EXIT_OK:
            exit_code = EXIT_IO
    return exit_code


if __name__ == "__main__":
    sys.exit(main())
