"""Periodic forcing θ, its average I(θ) and exact time integrals."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, Tuple, Union

import numpy as np
from scipy.interpolate import CubicSpline, PPoly

from osnls.errors import ConfigError, InvalidParamsError

logger = logging.getLogger(__name__)

MIN_TABULATED_SAMPLES = 4


@dataclass(frozen=True)
class ConstantTheta:
    c: float


@dataclass(frozen=True)
class SineAffineTheta:
    """θ(s) = λ0 + λ1·sin(2πs/τ)."""

    lambda0: float
    lambda1: float
    tau: float = 2.0 * math.pi

    def __post_init__(self) -> None:
        if not self.tau > 0:
            raise InvalidParamsError(f"tau must be > 0: got {self.tau!r}")


@dataclass(frozen=True)
class TabulatedTheta:
    """Periodic cubic spline through samples θ(kτ/n), k = 0..n-1."""

    tau: float
    samples: Tuple[float, ...]
    _spline: CubicSpline = field(init=False, repr=False, compare=False)
    _primitive: PPoly = field(init=False, repr=False, compare=False)
    _average: float = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if not self.tau > 0:
            raise InvalidParamsError(f"tau must be > 0: got {self.tau!r}")
        samples = tuple(float(s) for s in self.samples)
        if len(samples) < MIN_TABULATED_SAMPLES:
            raise InvalidParamsError(
                f"tabulated profile needs >= {MIN_TABULATED_SAMPLES} samples: got {len(samples)}"
            )
        if not all(math.isfinite(s) for s in samples):
            raise InvalidParamsError("tabulated profile has non-finite samples")
        knots = np.linspace(0.0, self.tau, len(samples) + 1)
        spline = CubicSpline(knots, np.array(samples + samples[:1]), bc_type="periodic")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "_spline", spline)
        # piecewise quartic on the same knots, zero at s = 0
        primitive = spline.antiderivative()
        object.__setattr__(self, "_primitive", primitive)
        object.__setattr__(self, "_average", float(primitive(self.tau)) / self.tau)


ThetaProfile = Union[ConstantTheta, SineAffineTheta, TabulatedTheta]


def theta_eval(profile: ThetaProfile, s):
    """θ(s); scalars give a float, arrays an array of the same shape."""
    points = np.asarray(s, dtype=float)
    if isinstance(profile, ConstantTheta):
        values = np.full(points.shape, float(profile.c))
    elif isinstance(profile, SineAffineTheta):
        values = profile.lambda0 + profile.lambda1 * np.sin(2.0 * np.pi * points / profile.tau)
    elif isinstance(profile, TabulatedTheta):
        values = profile._spline(np.mod(points, profile.tau))
    else:
        raise InvalidParamsError(f"Unknown theta profile {profile!r}")
    return float(values) if values.ndim == 0 else values


def theta_average(profile: ThetaProfile) -> float:
    """I(θ) = (1/τ)∫₀^τ θ(s) ds."""
    if isinstance(profile, ConstantTheta):
        return float(profile.c)
    if isinstance(profile, SineAffineTheta):
        return float(profile.lambda0)
    if isinstance(profile, TabulatedTheta):
        return profile._average
    raise InvalidParamsError(f"Unknown theta profile {profile!r}")


def _tabulated_antiderivative(profile: TabulatedTheta, s: float) -> float:
    # whole periods through the average, the remainder from the exact spline primitive
    periods = math.floor(s / profile.tau)
    rest = min(max(s - periods * profile.tau, 0.0), profile.tau)
    return periods * profile.tau * profile._average + float(profile._primitive(rest))


def theta_integral(profile: ThetaProfile, s1: float, s2: float) -> float:
    """Oriented ∫_{s1}^{s2} θ(s) ds (negative when s2 < s1)."""
    if isinstance(profile, ConstantTheta):
        return profile.c * (s2 - s1)
    if isinstance(profile, SineAffineTheta):
        k = 2.0 * math.pi / profile.tau
        # λ1/k·(cos(k s1) - cos(k s2)) written with a sine product to avoid cancellation
        oscillating = 2.0 * profile.lambda1 / k * math.sin(0.5 * k * (s1 + s2)) * math.sin(0.5 * k * (s2 - s1))
        return profile.lambda0 * (s2 - s1) + oscillating
    if isinstance(profile, TabulatedTheta):
        # shift both ends into the first period so short windows keep their digits
        shift = math.floor(min(s1, s2) / profile.tau) * profile.tau
        return _tabulated_antiderivative(profile, s2 - shift) - _tabulated_antiderivative(profile, s1 - shift)
    raise InvalidParamsError(f"Unknown theta profile {profile!r}")


def theta_window_integral(profile: ThetaProfile, omega: float, t0: float, t1: float) -> float:
    """∫_{t0}^{t1} θ(ωs) ds, reduced to a θ-integral by substitution so accuracy does not depend on ω."""
    if omega == 0:
        return float(theta_eval(profile, 0.0)) * (t1 - t0)
    return theta_integral(profile, omega * t0, omega * t1) / omega


def average_is_nonnegative(profile: ThetaProfile) -> bool:
    """Check I(θ) >= 0; a negative average is logged, not rejected."""
    average = theta_average(profile)
    if average < 0:
        logger.warning("Forcing average I(theta) = %r is negative; convergence theory does not apply", average)
        return False
    return True


def profile_from_dict(data: Dict[str, Any]) -> ThetaProfile:
    """Build a profile from its JSON form (kinds: constant, sine_affine, tabulated)."""
    kind = data.get("kind")
    allowed = {
        "constant": {"kind", "c"},
        "sine_affine": {"kind", "lambda0", "lambda1", "tau"},
        "tabulated": {"kind", "tau", "samples"},
    }
    if kind not in allowed:
        raise ConfigError(f"Unknown profile kind {kind!r}")
    extra = set(data) - allowed[kind]
    if extra:
        raise ConfigError(f"Unknown key(s) for {kind} profile: {', '.join(sorted(extra))}")
    try:
        if kind == "constant":
            return ConstantTheta(float(data["c"]))
        if kind == "sine_affine":
            return SineAffineTheta(float(data["lambda0"]), float(data["lambda1"]), float(data["tau"]))
        return TabulatedTheta(float(data["tau"]), tuple(float(s) for s in data["samples"]))
    except (KeyError, TypeError, ValueError, InvalidParamsError) as e:
        raise ConfigError(f"Invalid {kind} profile {data!r}: {e}") from e


def profile_to_dict(profile: ThetaProfile) -> Dict[str, Any]:
    if isinstance(profile, ConstantTheta):
        return {"kind": "constant", "c": profile.c}
    if isinstance(profile, SineAffineTheta):
        return {"kind": "sine_affine", "lambda0": profile.lambda0, "lambda1": profile.lambda1, "tau": profile.tau}
    return {"kind": "tabulated", "tau": profile.tau, "samples": list(profile.samples)}
