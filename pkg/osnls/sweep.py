"""ω-sweep convergence experiment, Duhamel-gap experiment, conservation table and single runs."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from osnls.analysis import AdmissiblePair, duhamel_gap, space_time_norm
from osnls.checkpoint import write_checkpoint, write_frames
from osnls.config import ExperimentConfig, config_to_dict
from osnls.errors import ConfigError, OsnlsError, SamplingTooCoarseError
from osnls.forcing import ConstantTheta, ThetaProfile, average_is_nonnegative, theta_average
from osnls.grid import ComplexField, norm_h1, norm_w1p
from osnls.initial_data import PreparedInitialData, build_initial_data, meets_acceptance_bounds
from osnls.integrator import STATUS_COMPLETED, RunTrace, SolverParams, final_field, relative_drift, simulate
from osnls.nonlinearity import NonlinearityKind, f_eval
from osnls.reports import write_diagnostics_csv, write_json, write_table

logger = logging.getLogger(__name__)

CONVERGENCE_NAME = "convergence.csv"
CONVERGENCE_META_NAME = "convergence_meta.json"
LIMIT_CHECKPOINT_NAME = "limit_final.osnl"
DUHAMEL_NAME = "duhamel.csv"
DUHAMEL_HEADER = ["omega", "q", "r", "gap"]
CONSERVATION_NAME = "conservation.csv"
CONSERVATION_HEADER = ["label", "omega", "dt", "mass_drift", "hamiltonian_drift"]
GRAD_FLAG = "grad_threshold_exceeded"
# default Duhamel source spacing: half of the sampling limit at the largest ω
DUHAMEL_SPACING_FACTOR = 0.25


@dataclass(frozen=True)
class SweepRow:
    omega: float
    sup_h1_gap: float
    pair_gaps: List[float]
    sup_grad: float
    status: str
    grad_flag: bool = False

    @property
    def completed(self) -> bool:
        return self.status == STATUS_COMPLETED

    @property
    def status_cell(self) -> str:
        return f"{self.status}|{GRAD_FLAG}" if self.grad_flag else self.status


@dataclass
class ConvergenceReport:
    pairs: List[AdmissiblePair]
    rows: List[SweepRow] = field(default_factory=list)
    fitted_rate: Optional[float] = None
    limit_solution_id: str = ""
    limit_status: str = STATUS_COMPLETED


def convergence_header(pairs: Sequence[AdmissiblePair]) -> List[str]:
    return ["omega", "sup_h1_gap"] + [f"gap_{p.label}" for p in pairs] + ["sup_grad", "status"]


def convergence_rows(report: ConvergenceReport) -> List[List[object]]:
    return [
        [row.omega, row.sup_h1_gap, *row.pair_gaps, row.sup_grad, row.status_cell]
        for row in report.rows
    ]


def fit_rate(rows: Sequence[SweepRow]) -> Optional[float]:
    """Least-squares slope of log(sup_h1_gap) against log(ω) over completed rows; observational only."""
    points = [(r.omega, r.sup_h1_gap) for r in rows if r.completed and r.sup_h1_gap > 0]
    if len(points) < 2:
        return None
    omegas, gaps = zip(*points)
    return float(np.polyfit(np.log(omegas), np.log(gaps), 1)[0])


def _prepare(config: ExperimentConfig) -> Tuple[PreparedInitialData, float]:
    if not average_is_nonnegative(config.profile) and not config.allow_negative_average:
        raise ConfigError(
            f"I(theta) = {theta_average(config.profile)!r} is negative; set allow_negative_average to explore it"
        )
    coefficient = max(theta_average(config.profile), 0.0)
    prepared = build_initial_data(
        config.initial_data,
        config.grid,
        coefficient=coefficient,
        kind=config.nonlinearity,
        allow_supercritical=config.allow_supercritical,
    )
    return prepared, coefficient


# --- ω workers ----------------------------------------------------------------

# U frames, installed once per worker process and only read afterwards
_LIMIT_FRAMES: List[Tuple[float, ComplexField]] = []


def _install_limit_frames(frames: List[Tuple[float, ComplexField]]) -> None:
    global _LIMIT_FRAMES
    _LIMIT_FRAMES = frames


@dataclass(frozen=True)
class _OmegaTask:
    omega: float
    u0: ComplexField
    params: SolverParams
    profile: ThetaProfile
    kind: NonlinearityKind
    coefficient: float
    pairs: List[AdmissiblePair]


def _failed_row(task: _OmegaTask, status: str, sup_grad: float, grad_flag: bool) -> SweepRow:
    return SweepRow(task.omega, math.nan, [math.nan] * len(task.pairs), sup_grad, status, grad_flag)


def _run_omega(task: _OmegaTask) -> SweepRow:
    """Solve for one ω and compare to U frame by frame; u_ω frames are never kept."""
    limit = _LIMIT_FRAMES
    times: List[float] = []
    h1_gaps: List[float] = []
    pair_norms: List[List[float]] = [[] for _ in task.pairs]

    def compare(index: int, t: float, frame: ComplexField, diag) -> None:
        difference = frame.with_values(frame.values - limit[index][1].values)
        times.append(t)
        h1_gaps.append(norm_h1(difference))
        for k, pair in enumerate(task.pairs):
            pair_norms[k].append(norm_w1p(difference, pair.r))

    try:
        trace = simulate(
            task.u0, task.params, task.profile, task.kind, task.coefficient, on_frame=compare, keep_frames=False
        )
    except OsnlsError as e:
        logger.warning("omega = %g failed: %s", task.omega, e)
        return _failed_row(task, "failed", math.nan, False)
    if not trace.completed:
        return _failed_row(task, trace.status, trace.sup_grad, trace.grad_threshold_exceeded)
    gaps = [space_time_norm(times, pair_norms[k], pair.q) for k, pair in enumerate(task.pairs)]
    logger.info("omega = %g: sup_h1_gap = %.6g, sup_grad = %.6g", task.omega, max(h1_gaps), trace.sup_grad)
    return SweepRow(task.omega, max(h1_gaps), gaps, trace.sup_grad, STATUS_COMPLETED, trace.grad_threshold_exceeded)


def _map_tasks(tasks: List[_OmegaTask], frames: List[Tuple[float, ComplexField]], threads: int) -> List[SweepRow]:
    # rows come back in task order whatever the scheduling
    if threads <= 1 or len(tasks) <= 1:
        _install_limit_frames(frames)
        try:
            return [_run_omega(t) for t in tasks]
        finally:
            _install_limit_frames([])
    with Pool(min(threads, len(tasks)), initializer=_install_limit_frames, initargs=(frames,)) as pool:
        return pool.map(_run_omega, tasks)


def run_convergence_sweep(config: ExperimentConfig, threads: int = 1) -> ConvergenceReport:
    """Solve the averaged equation once, then every ω, and measure u_ω - U on the shared frame schedule."""
    prepared, coefficient = _prepare(config)
    average = theta_average(config.profile)
    report = ConvergenceReport(pairs=list(config.pairs))
    within_bounds = meets_acceptance_bounds(prepared)
    if not within_bounds:
        logger.warning(
            "Initial data outside the convergence margins (H(u0) = %.6g, grad_l2 = %.6g); gaps may not shrink",
            prepared.criticality.hamiltonian, prepared.grad_l2,
        )

    limit_trace = simulate(
        prepared.field, config.solver_params(0.0), ConstantTheta(average), config.nonlinearity, coefficient
    )
    report.limit_status = limit_trace.status
    out_dir = Path(config.output_dir)
    if limit_trace.completed:
        limit_path = out_dir / LIMIT_CHECKPOINT_NAME
        write_checkpoint(limit_path, final_field(limit_trace), config.t_end)
        report.limit_solution_id = str(limit_path)
        tasks = [
            _OmegaTask(
                omega, prepared.field, config.solver_params(omega), config.profile,
                config.nonlinearity, coefficient, list(config.pairs),
            )
            for omega in config.omegas
        ]
        report.rows = _map_tasks(tasks, limit_trace.frames, threads)
    else:
        logger.warning("Limit run ended with status %s; no omega row can be compared", limit_trace.status)
        report.rows = [
            SweepRow(omega, math.nan, [math.nan] * len(config.pairs), math.nan, f"limit_{limit_trace.status}")
            for omega in config.omegas
        ]
    report.fitted_rate = fit_rate(report.rows)

    write_table(out_dir / CONVERGENCE_NAME, convergence_header(report.pairs), convergence_rows(report))
    write_json(
        out_dir / CONVERGENCE_META_NAME,
        {
            "fitted_rate": report.fitted_rate,
            "average": average,
            "average_nonnegative": average >= 0,
            "hamiltonian_u0": prepared.criticality.hamiltonian,
            "classification": prepared.criticality.label,
            "grad_l2_u0": prepared.grad_l2,
            "acceptance_bounds_met": within_bounds,
            "limit_status": report.limit_status,
            "limit_checkpoint": report.limit_solution_id,
            "config": config_to_dict(config),
        },
    )
    return report


# --- Duhamel experiment -------------------------------------------------------


def duhamel_times(config: ExperimentConfig) -> np.ndarray:
    spacing = config.duhamel_spacing
    if spacing is None:
        spacing = DUHAMEL_SPACING_FACTOR / max(1.0, max(config.omegas))
    steps = max(1, int(math.ceil(config.t_end / spacing - 1e-9)))
    return np.linspace(0.0, config.t_end, steps + 1)


def run_duhamel_experiment(config: ExperimentConfig) -> Tuple[Path, int]:
    """duhamel_gap per (ω, pair) for the fixed source f(u0); writes duhamel.csv."""
    prepared, _ = _prepare(config)
    source = f_eval(prepared.field, config.nonlinearity)
    times = duhamel_times(config)
    sources = [source] * len(times)
    rows = []
    for omega in config.omegas:
        for pair in config.pairs:
            try:
                gap = duhamel_gap(times, sources, config.profile, omega, pair)
            except SamplingTooCoarseError as e:
                raise ConfigError(f"duhamel_spacing too coarse: {e}") from e
            logger.info("duhamel omega = %g, %s: gap = %.6g", omega, pair.label, gap)
            rows.append([omega, pair.q, pair.r, gap])
    path = Path(config.output_dir) / DUHAMEL_NAME
    return path, write_table(path, DUHAMEL_HEADER, rows)


# --- conservation -------------------------------------------------------------


def _drift_row(label: str, omega: float, dt: float, trace: RunTrace) -> List[object]:
    masses = [d.mass for d in trace.diagnostics]
    energies = [d.hamiltonian for d in trace.diagnostics]
    return [label, omega, dt, relative_drift(masses), relative_drift(energies)]


def run_conservation_check(config: ExperimentConfig) -> Tuple[Path, int]:
    """Mass and Hamiltonian drift of the limit run (at dt and dt/2) and of every ω run.

    The Hamiltonian uses the coefficient I(θ); it is conserved only by the limit flow and is reported
    for the ω runs as context.
    """
    prepared, coefficient = _prepare(config)
    average = ConstantTheta(theta_average(config.profile))
    rows = []
    params = config.solver_params(0.0)
    half = SolverParams(
        dt=params.dt / 2.0,
        t_end=params.t_end,
        save_stride=params.save_stride * 2,
        grad_warn_threshold=params.grad_warn_threshold,
        spectral_tail_tol=params.spectral_tail_tol,
    )
    for label, p in (("limit", params), ("limit_half_dt", half)):
        trace = simulate(prepared.field, p, average, config.nonlinearity, coefficient)
        rows.append(_drift_row(label if trace.completed else f"{label}_{trace.status}", 0.0, p.dt, trace))
    for omega in config.omegas:
        trace = simulate(prepared.field, config.solver_params(omega), config.profile, config.nonlinearity, coefficient)
        label = "omega" if trace.completed else f"omega_{trace.status}"
        rows.append(_drift_row(label, omega, config.dt, trace))
    path = Path(config.output_dir) / CONSERVATION_NAME
    return path, write_table(path, CONSERVATION_HEADER, rows)


# --- single run ---------------------------------------------------------------


def run_simulation(
    config: ExperimentConfig, omega: float, out_dir: Path, save_frames: bool = False
) -> Tuple[RunTrace, Dict[str, Path]]:
    """One ω run: diagnostics.csv, final.osnl and optionally every saved frame."""
    prepared, coefficient = _prepare(config)
    trace = simulate(
        prepared.field, config.solver_params(omega), config.profile, config.nonlinearity, coefficient,
        keep_frames=True,
    )
    out_dir = Path(out_dir)
    paths = {"diagnostics": out_dir / "diagnostics.csv"}
    write_diagnostics_csv(paths["diagnostics"], trace)
    if trace.frames:
        t_last, last = trace.frames[-1]
        paths["final"] = out_dir / "final.osnl"
        write_checkpoint(paths["final"], last, t_last)
    if save_frames:
        write_frames(out_dir / "frames", trace.frames)
        paths["frames"] = out_dir / "frames"
    return trace, paths
