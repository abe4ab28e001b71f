"""Numerical verifiers for the Moser–Trudinger and L^∞ logarithmic inequalities.

Both inequalities only assert that some constant exists; the functions here evaluate the quotient
or the deficit for one field, and the fit_* helpers report the empirical constant over a family.
"""
from __future__ import annotations

import math
from typing import Iterable

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from osnls.errors import (
    DegenerateInputError,
    HypothesisViolatedError,
    InvalidParamsError,
    OverflowGuardError,
    ResolutionTooCoarseError,
    ThresholdViolatedError,
)
from osnls.grid import ComplexField, GridSpec, coordinates, grad_l2, holder_norm, norm_h1, norm_l2, norm_linf, norm_mu
from osnls.nonlinearity import OVERFLOW_EXPONENT

HYPOTHESIS_SLACK = 1e-9
CONSTRAINT_GRADIENT = "gradient"
CONSTRAINT_H1 = "h1"
CONSTRAINTS = (CONSTRAINT_GRADIENT, CONSTRAINT_H1)


def _require_nonzero(field: ComplexField, what: str) -> None:
    if not np.any(field.values):
        raise DegenerateInputError(f"{what} is undefined for the zero field")


def constraint_norm(field: ComplexField, constraint: str = CONSTRAINT_GRADIENT) -> float:
    if constraint == CONSTRAINT_GRADIENT:
        return grad_l2(field)
    if constraint == CONSTRAINT_H1:
        return norm_h1(field)
    raise InvalidParamsError(f"constraint must be one of {CONSTRAINTS}: got {constraint!r}")


def rescale_to(field: ComplexField, target: float, constraint: str = CONSTRAINT_GRADIENT) -> ComplexField:
    """Scale the field so that its constraint norm (‖∇u‖ or ‖u‖_{H¹}) equals target."""
    if not target > 0:
        raise InvalidParamsError(f"rescale target must be > 0: got {target!r}")
    current = constraint_norm(field, constraint)
    if current == 0:
        raise DegenerateInputError(f"cannot rescale a field with zero {constraint} norm")
    return field.with_values(field.values * (target / current))


def moser_trudinger_ratio(field: ComplexField, alpha: float, constraint: str = CONSTRAINT_GRADIENT) -> float:
    """‖e^{α|u|²} - 1‖_{L¹} / ‖u‖²_{L²} for fields in the unit ball of the constraint norm."""
    if not alpha >= 0:
        raise InvalidParamsError(f"alpha must be >= 0: got {alpha!r}")
    _require_nonzero(field, "moser_trudinger_ratio")
    size = constraint_norm(field, constraint)
    if size > 1.0 + HYPOTHESIS_SLACK:
        raise HypothesisViolatedError(f"{constraint} norm {size!r} exceeds 1")
    abs2 = field.values.real ** 2 + field.values.imag ** 2
    exponent = alpha * float(np.max(abs2))
    if not exponent <= OVERFLOW_EXPONENT:
        raise OverflowGuardError(f"overflow guard: max α|u|² = {exponent!r} exceeds {OVERFLOW_EXPONENT}", exponent)
    integral = float(np.sum(np.expm1(alpha * abs2))) * field.grid.cell_area
    return integral / norm_l2(field) ** 2


def moser_sequence(n: int, grid: GridSpec) -> ComplexField:
    """Radial Moser function centred at the origin, mollified over one cell at both kinks.

    sqrt(log n / 2π) on |x| <= 1/n, log(1/|x|)/sqrt(2π log n) on 1/n < |x| <= 1, zero outside.
    The inner blend lies outside |x| = 1/n and the outer one inside |x| = 1, so the origin value
    and the unit support are kept exactly.
    """
    if int(n) != n or n < 2:
        raise InvalidParamsError(f"moser_sequence needs an integer n >= 2: got {n!r}")
    h = max(grid.dx, grid.dy)
    if min(grid.lx, grid.ly) / 2.0 < 1.0 + h:
        raise InvalidParamsError(f"unit support does not fit in the box {grid.lx!r} x {grid.ly!r}")
    inner = 1.0 / n
    if inner < 2.0 * h:
        raise ResolutionTooCoarseError(f"core radius 1/n = {inner!r} is below two cells ({2.0 * h!r})")

    log_n = math.log(n)
    scale = math.sqrt(2.0 * math.pi * log_n)
    core = math.sqrt(log_n / (2.0 * math.pi))

    def profile(r):
        return np.log(1.0 / r) / scale

    def slope(r):
        return -1.0 / (r * scale)

    X, Y = coordinates(grid)
    r = np.hypot(X, Y)
    values = np.zeros(grid.shape)
    values[r <= inner] = core
    log_part = (r > inner + h) & (r < 1.0 - h)
    values[log_part] = profile(r[log_part])

    a, b = inner, inner + h
    inner_blend = CubicHermiteSpline([a, b], [core, profile(b)], [0.0, slope(b)])
    mask = (r > a) & (r <= b)
    values[mask] = inner_blend(r[mask])

    a, b = 1.0 - h, 1.0
    outer_blend = CubicHermiteSpline([a, b], [profile(a), 0.0], [slope(a), 0.0])
    mask = (r >= a) & (r <= b)
    values[mask] = outer_blend(r[mask])
    return ComplexField(grid, values.astype(np.complex128))


def _check_log_params(lam: float, mu: float, beta: float) -> None:
    if not 0 < beta < 1:
        raise InvalidParamsError(f"beta must lie in (0, 1): got {beta!r}")
    if not 0 < mu <= 1:
        raise InvalidParamsError(f"mu must lie in (0, 1]: got {mu!r}")
    threshold = 1.0 / (2.0 * math.pi * beta)
    if not lam > threshold:
        raise ThresholdViolatedError(f"lambda = {lam!r} must exceed 1/(2πβ) = {threshold!r}")


def _log_terms(field: ComplexField, mu: float, beta: float):
    m = norm_mu(field, mu)
    return norm_linf(field) ** 2, m, (8.0 / mu) ** beta * holder_norm(field, beta) / m


def log_estimate_deficit(field: ComplexField, lam: float, mu: float, beta: float, c_lambda: float) -> float:
    """λ‖u‖²_μ·log(C_λ + (8/μ)^β‖u‖_{C^β}/‖u‖_μ) - ‖u‖²_{L^∞}; non-negative when the estimate holds."""
    _check_log_params(lam, mu, beta)
    if not c_lambda > 0:
        raise InvalidParamsError(f"c_lambda must be > 0: got {c_lambda!r}")
    _require_nonzero(field, "log_estimate_deficit")
    lhs, m, holder_term = _log_terms(field, mu, beta)
    return lam * m * m * math.log(c_lambda + holder_term) - lhs


def minimal_log_constant(field: ComplexField, lam: float, mu: float, beta: float) -> float:
    """The C_λ at which the deficit vanishes for this field (may be below 1 or negative)."""
    _check_log_params(lam, mu, beta)
    _require_nonzero(field, "minimal_log_constant")
    lhs, m, holder_term = _log_terms(field, mu, beta)
    return math.exp(lhs / (lam * m * m)) - holder_term


def fit_minimal_log_constant(
    fields: Iterable[ComplexField], lam: float, mu: float, beta: float, floor: float = 1.0
) -> float:
    """Smallest C_λ >= floor with a non-negative deficit for every field."""
    best = floor
    for field in fields:
        best = max(best, minimal_log_constant(field, lam, mu, beta))
    return best


def fit_mt_constant(fields: Iterable[ComplexField], alpha: float, constraint: str = CONSTRAINT_GRADIENT) -> float:
    """Empirical c_α: the largest ratio over the family (0 for an empty family)."""
    return max((moser_trudinger_ratio(f, alpha, constraint) for f in fields), default=0.0)
