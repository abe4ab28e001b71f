"""Space-time (Strichartz-type) norms, the averaging gap of the Duhamel integral and criticality."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np
from scipy.integrate import trapezoid

from osnls.errors import InsufficientFramesError, InvalidParamsError, SamplingTooCoarseError
from osnls.forcing import ThetaProfile, theta_average, theta_eval
from osnls.grid import ComplexField, get_workspace, grad_l2, norm_lp, norm_w1p
from osnls.integrator import RunTrace
from osnls.nonlinearity import EXPONENTIAL, NonlinearityKind, potential_density

SUBCRITICAL = "subcritical"
CRITICAL = "critical"
SUPERCRITICAL = "supercritical"
CRITICAL_TOLERANCE = 1e-9
# Duhamel sources need at least two samples per 1/|ω|
DUHAMEL_SAMPLING = 0.5


@dataclass(frozen=True)
class AdmissiblePair:
    """Strichartz pair with 2/q = 1 - 2/r; q = inf pairs with r = 2."""

    q: float
    r: float

    @property
    def label(self) -> str:
        return f"q{_format_exponent(self.q)}_r{_format_exponent(self.r)}"


def _format_exponent(value: float) -> str:
    return "inf" if math.isinf(value) else f"{value:g}"


def admissible_pair(q: Optional[Union[float, str]] = None, r: Optional[float] = None) -> AdmissiblePair:
    """Build a pair from q (r is derived) or from r (q is derived)."""
    if (q is None) == (r is None):
        raise InvalidParamsError("admissible_pair takes exactly one of q or r")
    if q is not None:
        q = float(q)
        if not q > 2:
            raise InvalidParamsError(f"admissible q must lie in (2, inf]: got {q!r}")
        if math.isinf(q):
            return AdmissiblePair(math.inf, 2.0)
        return AdmissiblePair(q, 2.0 / (1.0 - 2.0 / q))
    r = float(r)
    if not (2 <= r < math.inf):
        raise InvalidParamsError(f"admissible r must lie in [2, inf): got {r!r}")
    if r == 2:
        return AdmissiblePair(math.inf, 2.0)
    return AdmissiblePair(2.0 / (1.0 - 2.0 / r), r)


def spatial_norm(u: ComplexField, r: float, with_derivatives: bool) -> float:
    return norm_w1p(u, r) if with_derivatives else norm_lp(u, r)


def space_time_norm(times: Sequence[float], norms: Sequence[float], q: float) -> float:
    """(∫ n(t)^q dt)^{1/q} by composite trapezoid over the samples; q = inf takes the max."""
    if len(norms) == 0:
        raise InsufficientFramesError("space-time norm of an empty sample")
    values = np.asarray(norms, dtype=float)
    if math.isinf(q):
        return float(np.max(values))
    if len(values) < 2:
        raise InsufficientFramesError(f"finite q = {q!r} needs >= 2 frames: got {len(values)}")
    return float(trapezoid(values ** q, np.asarray(times, dtype=float))) ** (1.0 / q)


def time_space_norm(trace: RunTrace, pair: AdmissiblePair, with_derivatives: bool = True) -> float:
    """‖u‖_{L^q(W^{1,r})} (or L^q(L^r)) over the saved frames of a run."""
    if not trace.frames:
        raise InsufficientFramesError("trace kept no frames")
    times = [t for t, _ in trace.frames]
    norms = [spatial_norm(frame, pair.r, with_derivatives) for _, frame in trace.frames]
    return space_time_norm(times, norms, pair.q)


def duhamel_gap(
    times: Sequence[float],
    sources: Sequence[ComplexField],
    profile: ThetaProfile,
    omega: float,
    pair: AdmissiblePair,
) -> float:
    """‖∫₀^t (θ(ωs) - I(θ)) e^{i(t-s)Δ} f(s) ds‖ in L^q((0,T), L^r), trapezoid in s.

    The propagators are exact: e^{i(t-s)Δ}f̂ = e^{-i|k|²t}·e^{i|k|²s}f̂, so the inner integral is
    accumulated once on the Fourier side.
    """
    times = np.asarray(times, dtype=float)
    if len(times) < 2:
        raise InsufficientFramesError(f"duhamel_gap needs >= 2 source frames: got {len(times)}")
    if len(sources) != len(times):
        raise InvalidParamsError(f"{len(sources)} source frames for {len(times)} times")
    steps = np.diff(times)
    h = float(steps[0])
    if not (h > 0 and np.allclose(steps, h, rtol=1e-9, atol=0.0)):
        raise InvalidParamsError("duhamel_gap needs a uniform increasing time grid")
    limit = DUHAMEL_SAMPLING / max(1.0, abs(omega))
    if h > limit * (1.0 + 1e-9):
        raise SamplingTooCoarseError(
            f"source spacing {h!r} exceeds {limit!r} for omega = {omega!r}"
        )

    grid = sources[0].grid
    ws = get_workspace(grid)
    weights = np.asarray(theta_eval(profile, omega * times), dtype=float) - theta_average(profile)
    accumulated = np.zeros(grid.shape, dtype=np.complex128)
    norms = [0.0]
    previous = None
    cached_source = None
    cached_spectrum = None
    for i, (s, source) in enumerate(zip(times, sources)):
        if weights[i] == 0.0:
            current = 0.0
        else:
            if source is not cached_source:
                cached_source, cached_spectrum = source, ws.forward(source.values)
            current = weights[i] * np.exp(1j * ws.k2 * s) * cached_spectrum
        if i > 0:
            accumulated = accumulated + 0.5 * h * (previous + current)
            difference = ws.inverse(accumulated * np.exp(-1j * ws.k2 * s))
            norms.append(norm_lp(ComplexField(grid, difference), pair.r))
        previous = current
    return space_time_norm(times, norms, pair.q)


@dataclass(frozen=True)
class Criticality:
    label: str
    hamiltonian: float


def hamiltonian(u: ComplexField, coefficient: float, kind: NonlinearityKind = EXPONENTIAL) -> float:
    """H(u) = ‖∇u‖² + (coefficient/4π)·∫(e^{4π|u|²} - 1 - 4π|u|²)."""
    return grad_l2(u) ** 2 + potential_density(u, coefficient, kind)


def criticality_classify(u0: ComplexField, coefficient: float, kind: NonlinearityKind = EXPONENTIAL) -> Criticality:
    value = hamiltonian(u0, coefficient, kind)
    if abs(value - 1.0) <= CRITICAL_TOLERANCE:
        return Criticality(CRITICAL, value)
    return Criticality(SUBCRITICAL if value < 1.0 else SUPERCRITICAL, value)
