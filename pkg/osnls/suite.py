"""Inequality suites: Moser–Trudinger (gradient and H¹ constraints), its sharpness check and the
L^∞ logarithmic estimate, evaluated over built-in families on a base and a refined grid."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

from osnls.config import ExperimentConfig
from osnls.errors import OsnlsError
from osnls.grid import ComplexField, GridSpec
from osnls.inequalities import (
    CONSTRAINT_GRADIENT,
    CONSTRAINT_H1,
    minimal_log_constant,
    moser_sequence,
    moser_trudinger_ratio,
    rescale_to,
)
from osnls.initial_data import sample_initial_data
from osnls.reports import write_table

logger = logging.getLogger(__name__)

SUITE_HEADER = ["family_member", "alpha_or_lambda", "ratio_or_min_constant", "grid_size"]
MT_NAME = "moser_trudinger.csv"
MT_H1_NAME = "moser_trudinger_h1.csv"
LOG_NAME = "log_estimate.csv"

MT_ALPHA = 3.9 * math.pi
SHARPNESS_ALPHA = 4.2 * math.pi
H1_ALPHA = 4.0 * math.pi
LOG_LAMBDA = 2.0 / math.pi
LOG_MU = 1.0
LOG_BETA = 0.5
LOG_FLOOR = 1.0
REFINEMENT = 2


def _gaussian(sigma: float) -> Dict[str, Any]:
    return {"family": "gaussian", "amplitude": 1.0, "sigma": sigma, "center": [0.0, 0.0]}


def _bump(radius: float) -> Dict[str, Any]:
    return {"family": "bump", "amplitude": 1.0, "radius": radius, "center": [0.0, 0.0]}


@dataclass(frozen=True)
class SuiteFamilies:
    """Shapes are initial-data descriptors; amplitudes are irrelevant, members are rescaled."""

    mt_shapes: List[Dict[str, Any]] = field(
        default_factory=lambda: [_gaussian(s) for s in (0.5, 0.75, 1.0, 1.5)]
        + [_bump(r) for r in (1.0, 2.0, 3.0, 4.0)]
        + [{"family": "moser", "n": 4}, {"family": "moser", "n": 8}]
    )
    mt_levels: List[float] = field(default_factory=lambda: [1.0, 0.9, 0.75, 0.5, 0.25])
    h1_levels: List[float] = field(default_factory=lambda: [1.0])
    moser_ns: List[int] = field(default_factory=lambda: [4, 8, 16])
    log_shapes: List[Dict[str, Any]] = field(
        default_factory=lambda: [_gaussian(s) for s in (0.5, 0.75, 1.0, 1.5)]
        + [_bump(r) for r in (1.0, 2.0, 3.0, 4.0)]
    )
    random_members: int = 4

    @classmethod
    def empty(cls) -> "SuiteFamilies":
        return cls([], [], [], [], [], 0)

    def with_random(self, seed: int) -> "SuiteFamilies":
        """Append `random_members` Gaussian mixtures drawn from seed, seed + 1, ... to both shape lists."""
        mixtures = [{"family": "mixture", "count": 3, "seed": seed + k} for k in range(self.random_members)]
        return replace(self, mt_shapes=self.mt_shapes + mixtures, log_shapes=self.log_shapes + mixtures, random_members=0)


@dataclass
class SuiteReport:
    paths: Dict[str, Path] = field(default_factory=dict)
    mt_constants: Dict[str, float] = field(default_factory=dict)
    h1_constant: float = 0.0
    moser_ratios: List[float] = field(default_factory=list)
    log_constants: Dict[str, float] = field(default_factory=dict)
    failures: int = 0


def grid_label(grid: GridSpec) -> str:
    return f"{grid.nx}x{grid.ny}"


def shape_label(descriptor: Dict[str, Any]) -> str:
    family = descriptor["family"]
    if family == "gaussian":
        return f"gaussian_s{descriptor['sigma']:g}"
    if family == "bump":
        return f"bump_r{descriptor['radius']:g}"
    if family == "moser":
        return f"moser_n{descriptor['n']}"
    if family == "mixture":
        return f"mixture_seed{descriptor['seed']}"
    return family


def _members(
    shapes: Sequence[Dict[str, Any]], levels: Sequence[float], grid: GridSpec, constraint: str
) -> List[Tuple[str, ComplexField]]:
    members = []
    for shape in shapes:
        base = sample_initial_data(shape, grid)
        for level in levels:
            members.append((f"{shape_label(shape)}@{level:g}", rescale_to(base, level, constraint)))
    return members


class _Collector:
    """Rows of one report plus the failure count."""

    def __init__(self, report: SuiteReport) -> None:
        self.rows: List[List[object]] = []
        self.report = report

    def evaluate(self, name: str, parameter: float, grid: GridSpec, compute) -> float:
        try:
            value = compute()
        except OsnlsError as e:
            logger.warning("Suite case %s on %s failed: %s", name, grid_label(grid), e)
            self.report.failures += 1
            value = math.nan
        self.rows.append([name, parameter, value, grid_label(grid)])
        return value


def _sharpness_ratio(n: int, grid: GridSpec) -> float:
    # mollifying the kinks moves the discrete gradient norm slightly off 1
    return moser_trudinger_ratio(rescale_to(moser_sequence(n, grid), 1.0), SHARPNESS_ALPHA)


def _finite_max(values: Sequence[float], floor: float = 0.0) -> float:
    finite = [v for v in values if not math.isnan(v)]
    return max([floor] + finite)


def run_inequality_suite(config: ExperimentConfig, families: Optional[SuiteFamilies] = None) -> SuiteReport:
    """Write moser_trudinger.csv, moser_trudinger_h1.csv and log_estimate.csv; per-case failures are rows with nan."""
    if families is None:
        families = SuiteFamilies()
    families = families.with_random(config.seed)
    base = config.inequality_grid
    fine = base.refined(REFINEMENT)
    report = SuiteReport()
    out_dir = Path(config.output_dir)

    mt = _Collector(report)
    for grid in (base, fine):
        ratios = [
            mt.evaluate(name, MT_ALPHA, grid, lambda f=member: moser_trudinger_ratio(f, MT_ALPHA))
            for name, member in _members(families.mt_shapes, families.mt_levels, grid, CONSTRAINT_GRADIENT)
        ]
        if ratios:
            report.mt_constants[grid_label(grid)] = _finite_max(ratios)
            mt.rows.append(["c_alpha", MT_ALPHA, report.mt_constants[grid_label(grid)], grid_label(grid)])
    for n in families.moser_ns:
        report.moser_ratios.append(
            mt.evaluate(f"moser_n{n}", SHARPNESS_ALPHA, fine, lambda n=n: _sharpness_ratio(n, fine))
        )
    report.paths["moser_trudinger"] = out_dir / MT_NAME
    write_table(report.paths["moser_trudinger"], SUITE_HEADER, mt.rows)

    h1 = _Collector(report)
    h1_ratios = [
        h1.evaluate(name, H1_ALPHA, base, lambda f=member: moser_trudinger_ratio(f, H1_ALPHA, CONSTRAINT_H1))
        for name, member in _members(families.mt_shapes, families.h1_levels, base, CONSTRAINT_H1)
    ]
    if h1_ratios:
        report.h1_constant = _finite_max(h1_ratios)
        h1.rows.append(["c_alpha", H1_ALPHA, report.h1_constant, grid_label(base)])
    report.paths["moser_trudinger_h1"] = out_dir / MT_H1_NAME
    write_table(report.paths["moser_trudinger_h1"], SUITE_HEADER, h1.rows)

    log = _Collector(report)
    for grid in (base, fine):
        constants = [
            log.evaluate(
                shape_label(shape), LOG_LAMBDA, grid,
                lambda s=shape: minimal_log_constant(sample_initial_data(s, grid), LOG_LAMBDA, LOG_MU, LOG_BETA),
            )
            for shape in families.log_shapes
        ]
        if constants:
            report.log_constants[grid_label(grid)] = _finite_max(constants, LOG_FLOOR)
            log.rows.append(["c_lambda", LOG_LAMBDA, report.log_constants[grid_label(grid)], grid_label(grid)])
    report.paths["log_estimate"] = out_dir / LOG_NAME
    write_table(report.paths["log_estimate"], SUITE_HEADER, log.rows)

    logger.info(
        "Inequality suite: c_alpha %s, H1 constant %.6g, Moser %s, C_lambda %s, %d failure(s)",
        report.mt_constants, report.h1_constant, report.moser_ratios, report.log_constants, report.failures,
    )
    return report
