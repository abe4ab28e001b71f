"""Initial-data families sampled on the torus and the criticality gate in front of the sweep."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from osnls.analysis import SUBCRITICAL, Criticality, criticality_classify
from osnls.errors import ConfigError, SupercriticalInitialDataError
from osnls.grid import ComplexField, GridSpec, coordinates, grad_l2
from osnls.inequalities import moser_sequence
from osnls.nonlinearity import EXPONENTIAL, NonlinearityKind

logger = logging.getLogger(__name__)

FAMILY_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "zero": {},
    "gaussian": {"amplitude": 0.3, "sigma": 1.5, "center": [0.0, 0.0]},
    "bump": {"amplitude": 0.3, "radius": 2.0, "center": [0.0, 0.0]},
    "moser": {"n": 4},
    "mode": {"amplitude": 0.1, "mx": 1, "my": 0},
    "mixture": {"amplitude": 0.3, "count": 3, "seed": 0},
}
# H(u0) ≈ 0.52 and ‖∇u0‖ ≈ 0.53 with coefficient 1; wide enough to stay resolved at desk scale
DEFAULT_DESCRIPTOR: Dict[str, Any] = {"family": "gaussian", **FAMILY_DEFAULTS["gaussian"]}
ACCEPTANCE_MAX_HAMILTONIAN = 0.9
ACCEPTANCE_MAX_GRAD = 0.95


@dataclass(frozen=True)
class PreparedInitialData:
    field: ComplexField
    descriptor: Dict[str, Any]
    criticality: Criticality
    grad_l2: float


def normalize_descriptor(descriptor: Dict[str, Any]) -> Dict[str, Any]:
    """Fill family defaults and reject unknown families or keys."""
    if not isinstance(descriptor, dict):
        raise ConfigError(f"initial_data must be an object: got {descriptor!r}")
    family = descriptor.get("family")
    if family not in FAMILY_DEFAULTS:
        raise ConfigError(f"Unknown initial_data family {family!r}; expected one of {sorted(FAMILY_DEFAULTS)}")
    defaults = FAMILY_DEFAULTS[family]
    extra = set(descriptor) - set(defaults) - {"family"}
    if extra:
        raise ConfigError(f"Unknown key(s) for {family} initial data: {', '.join(sorted(extra))}")
    merged: Dict[str, Any] = {"family": family, **defaults, **descriptor}
    try:
        if "center" in merged:
            cx, cy = (float(c) for c in merged["center"])
            merged["center"] = [cx, cy]
        for key in ("amplitude", "sigma", "radius"):
            if key in merged:
                merged[key] = float(merged[key])
        for key in ("n", "mx", "my", "count", "seed"):
            if key in merged:
                if int(merged[key]) != merged[key]:
                    raise ValueError(f"{key} must be an integer")
                merged[key] = int(merged[key])
    except (TypeError, ValueError) as e:
        raise ConfigError(f"Invalid {family} initial data {descriptor!r}: {e}") from e
    for key in ("sigma", "radius"):
        if key in merged and not merged[key] > 0:
            raise ConfigError(f"{family} initial data needs {key} > 0: got {merged[key]!r}")
    if family == "mixture" and merged["count"] < 1:
        raise ConfigError(f"mixture initial data needs count >= 1: got {merged['count']!r}")
    return merged


def _displacement(grid: GridSpec, center) -> np.ndarray:
    # minimal-image offsets so a shifted profile wraps around the torus
    X, Y = coordinates(grid)
    dx = np.mod(X - center[0] + grid.lx / 2.0, grid.lx) - grid.lx / 2.0
    dy = np.mod(Y - center[1] + grid.ly / 2.0, grid.ly) - grid.ly / 2.0
    return np.hypot(dx, dy)


def _mixture(d: Dict[str, Any], grid: GridSpec) -> ComplexField:
    """Sum of `count` Gaussians with random centres, widths and phases drawn from `seed`."""
    rng = np.random.default_rng(d["seed"])
    values = np.zeros(grid.shape, dtype=complex)
    for _ in range(d["count"]):
        center = rng.uniform(-0.25, 0.25, size=2) * (grid.lx, grid.ly)
        sigma = rng.uniform(0.5, 1.5)
        phase = rng.uniform(0.0, 2.0 * np.pi)
        r = _displacement(grid, center)
        values += np.exp(1j * phase) * np.exp(-(r ** 2) / (2.0 * sigma ** 2))
    return ComplexField(grid, d["amplitude"] * values / d["count"])


def sample_initial_data(descriptor: Dict[str, Any], grid: GridSpec) -> ComplexField:
    d = normalize_descriptor(descriptor)
    family = d["family"]
    if family == "zero":
        return ComplexField.zeros(grid)
    if family == "gaussian":
        r = _displacement(grid, d["center"])
        return ComplexField(grid, d["amplitude"] * np.exp(-(r ** 2) / (2.0 * d["sigma"] ** 2)))
    if family == "bump":
        s = _displacement(grid, d["center"]) / d["radius"]
        values = np.zeros(grid.shape)
        inside = s < 1.0
        values[inside] = d["amplitude"] * np.exp(1.0 - 1.0 / (1.0 - s[inside] ** 2))
        return ComplexField(grid, values)
    if family == "moser":
        return moser_sequence(d["n"], grid)
    if family == "mixture":
        return _mixture(d, grid)
    X, Y = coordinates(grid)
    kx = 2.0 * np.pi * d["mx"] / grid.lx
    ky = 2.0 * np.pi * d["my"] / grid.ly
    return ComplexField(grid, d["amplitude"] * np.exp(1j * (kx * X + ky * Y)))


def build_initial_data(
    descriptor: Dict[str, Any],
    grid: GridSpec,
    coefficient: float = 1.0,
    kind: NonlinearityKind = EXPONENTIAL,
    allow_supercritical: bool = False,
) -> PreparedInitialData:
    """Sample the data and classify it by H(u0); anything but subcritical needs the override."""
    normalized = normalize_descriptor(descriptor)
    field = sample_initial_data(normalized, grid)
    criticality = criticality_classify(field, coefficient, kind)
    grad = grad_l2(field)
    logger.info(
        "Initial data %s: H(u0) = %.6g (%s), grad_l2 = %.6g",
        normalized["family"], criticality.hamiltonian, criticality.label, grad,
    )
    if criticality.label != SUBCRITICAL:
        if not allow_supercritical:
            raise SupercriticalInitialDataError(
                f"H(u0) = {criticality.hamiltonian!r} is {criticality.label}; "
                "set allow_supercritical to run it anyway"
            )
        logger.warning("Running %s initial data (H(u0) = %.6g) by override", criticality.label, criticality.hamiltonian)
    return PreparedInitialData(field, normalized, criticality, grad)


def meets_acceptance_bounds(prepared: PreparedInitialData) -> bool:
    """H(u0) < 0.9 and ‖∇u0‖ < 0.95, the margins the convergence acceptance run assumes."""
    return (
        prepared.criticality.hamiltonian < ACCEPTANCE_MAX_HAMILTONIAN
        and prepared.grad_l2 < ACCEPTANCE_MAX_GRAD
    )
