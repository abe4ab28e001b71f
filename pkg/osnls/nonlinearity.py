"""Pointwise nonlinearity f(u) = u(e^{4π|u|²} - 1), its derivative components and potential energy.

The monomial |u|^{p-1}u is carried alongside for cross-validation runs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Dict, Tuple, Union

import numpy as np

from osnls.errors import ConfigError, DegenerateInputError, InvalidParamsError, OverflowGuardError
from osnls.grid import ComplexField, get_workspace

FOUR_PI = 4.0 * math.pi
# e^700 is close to the float64 ceiling
OVERFLOW_EXPONENT = 700.0


@dataclass(frozen=True)
class ExponentialCritical:
    alpha0: float = field(default=FOUR_PI, init=False)


@dataclass(frozen=True)
class Monomial:
    p: float

    def __post_init__(self) -> None:
        if not self.p > 1:
            raise InvalidParamsError(f"Monomial nonlinearity needs p > 1: got {self.p!r}")


NonlinearityKind = Union[ExponentialCritical, Monomial]
EXPONENTIAL = ExponentialCritical()


def kind_from_dict(data: Dict[str, Any]) -> NonlinearityKind:
    """{"kind": "exponential"} or {"kind": "monomial", "p": 3}."""
    kind = data.get("kind")
    extra = set(data) - {"kind", "p"}
    if extra:
        raise ConfigError(f"Unknown nonlinearity key(s): {', '.join(sorted(extra))}")
    if kind == "exponential":
        if "p" in data:
            raise ConfigError("Exponential nonlinearity takes no 'p'")
        return EXPONENTIAL
    if kind == "monomial":
        try:
            return Monomial(float(data["p"]))
        except (KeyError, TypeError, ValueError, InvalidParamsError) as e:
            raise ConfigError(f"Invalid monomial nonlinearity {data!r}: {e}") from e
    raise ConfigError(f"Unknown nonlinearity kind {kind!r}")


def kind_to_dict(kind: NonlinearityKind) -> Dict[str, Any]:
    if isinstance(kind, Monomial):
        return {"kind": "monomial", "p": kind.p}
    return {"kind": "exponential"}


def check_overflow(values: np.ndarray, kind: NonlinearityKind = EXPONENTIAL) -> None:
    """Raise OverflowGuardError when 4π|u|² exceeds the guard anywhere (NaN counts as exceeding)."""
    if isinstance(kind, Monomial):
        return
    exponent = FOUR_PI * float(np.max(values.real ** 2 + values.imag ** 2))
    if not exponent <= OVERFLOW_EXPONENT:
        raise OverflowGuardError(
            f"overflow guard: max 4π|u|² = {exponent!r} exceeds {OVERFLOW_EXPONENT}", exponent
        )


def modulus_factor(abs2: np.ndarray, kind: NonlinearityKind = EXPONENTIAL) -> np.ndarray:
    """g(|u|²) with f(u) = g(|u|²)·u."""
    if isinstance(kind, Monomial):
        return abs2 ** ((kind.p - 1.0) / 2.0)
    return np.expm1(FOUR_PI * abs2)


def _abs2(values: np.ndarray) -> np.ndarray:
    return values.real ** 2 + values.imag ** 2


def f_eval(u: ComplexField, kind: NonlinearityKind = EXPONENTIAL) -> ComplexField:
    check_overflow(u.values, kind)
    return u.with_values(u.values * modulus_factor(_abs2(u.values), kind))


def df_components(u: ComplexField, kind: NonlinearityKind = EXPONENTIAL) -> Tuple[np.ndarray, np.ndarray]:
    """Real fields (a, b) of (Df)(u).

    a = e^{4π|u|²} - 1 + 4π|u|² e^{4π|u|²}, b = 4π|u|² e^{4π|u|²}; for the monomial
    a = (p+1)/2·|u|^{p-1}, b = (p-1)/2·|u|^{p-1}.
    """
    check_overflow(u.values, kind)
    abs2 = _abs2(u.values)
    if isinstance(kind, Monomial):
        power = abs2 ** ((kind.p - 1.0) / 2.0)
        return 0.5 * (kind.p + 1.0) * power, 0.5 * (kind.p - 1.0) * power
    x = FOUR_PI * abs2
    b = x * np.exp(x)
    return np.expm1(x) + b, b


def chain_rule_gradient(u: ComplexField, kind: NonlinearityKind = EXPONENTIAL) -> Tuple[ComplexField, ComplexField]:
    """∇f(u) = a·∇u + b·(u/ū)·∇ū, assembled from df_components and the spectral gradient."""
    a, b = df_components(u, kind)
    abs2 = _abs2(u.values)
    with np.errstate(invalid="ignore", divide="ignore"):
        phase = np.where(abs2 > 0, u.values ** 2 / abs2, 0.0)
    dux, duy = get_workspace(u.grid).gradient_values(u.values)
    return (
        u.with_values(a * dux + b * phase * np.conj(dux)),
        u.with_values(a * duy + b * phase * np.conj(duy)),
    )


def potential_density(u: ComplexField, coefficient: float, kind: NonlinearityKind = EXPONENTIAL) -> float:
    """Potential part of the Hamiltonian, (coefficient/4π)·∫(e^{4π|u|²} - 1 - 4π|u|²)."""
    if coefficient < 0:
        raise InvalidParamsError(f"potential coefficient must be >= 0: got {coefficient!r}")
    if coefficient == 0:
        return 0.0
    check_overflow(u.values, kind)
    abs2 = _abs2(u.values)
    area = u.grid.cell_area
    if isinstance(kind, Monomial):
        integral = float(np.sum(abs2 ** ((kind.p + 1.0) / 2.0))) * area
        return 2.0 * coefficient / (kind.p + 1.0) * integral
    x = FOUR_PI * abs2
    integrand = np.maximum(np.expm1(x) - x, 0.0)
    return coefficient / FOUR_PI * float(np.sum(integrand)) * area


def f_scalar(u: complex) -> complex:
    return u * math.expm1(FOUR_PI * abs(u) ** 2)


def local_lipschitz_ratio(u: complex, v: complex, eps: float) -> float:
    """|f(u) - f(v)| / (|u - v|·(e^{4π(1+ε)|u|²} - 1 + e^{4π(1+ε)|v|²} - 1))."""
    if u == v:
        raise DegenerateInputError(f"local_lipschitz_ratio needs u != v: got u = v = {u!r}")
    if not eps > 0:
        raise InvalidParamsError(f"eps must be > 0: got {eps!r}")
    c = FOUR_PI * (1.0 + eps)
    denominator = abs(u - v) * (math.expm1(c * abs(u) ** 2) + math.expm1(c * abs(v) ** 2))
    return abs(f_scalar(u) - f_scalar(v)) / denominator
