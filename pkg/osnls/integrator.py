"""Strang split-step evolution of i∂t u + Δu = θ(ωt) f(u) and of its averaged limit.

Splitting order is nonlinear / linear / nonlinear. The nonlinear flow is an exact pointwise phase
rotation u ← u·exp(-iΘ·g(|u|²)) with Θ the exact θ-integral over the substep window; the linear flow
is the exact Fourier multiplier e^{itΔ}.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from osnls.errors import InvalidParamsError, OverflowGuardError
from osnls.forcing import ThetaProfile, theta_average, theta_window_integral
from osnls.grid import (
    ComplexField,
    SpectralWorkspace,
    get_workspace,
    grad_l2,
    holder_half_norm,
    norm_l2,
    norm_linf,
    norm_w14,
    spectral_tail_fraction,
)
from osnls.nonlinearity import EXPONENTIAL, NonlinearityKind, check_overflow, modulus_factor, potential_density

logger = logging.getLogger(__name__)

STATUS_COMPLETED = "completed"
STATUS_BLOWN_UP = "blown_up"
STATUS_UNDER_RESOLVED = "under_resolved"

# dt·|ω| bound: at least ~12 steps per unit of ωt
OSCILLATION_RESOLUTION = 0.5
DEFAULT_SPECTRAL_TAIL_TOL = 1e-10

DIAGNOSTICS_HEADER = ["time", "mass", "hamiltonian", "grad_l2", "linf", "w14", "holder_half"]


@dataclass(frozen=True)
class SolverParams:
    dt: float
    t_end: float
    save_stride: int = 1
    omega: float = 0.0
    grad_warn_threshold: float = 1.0
    spectral_tail_tol: Optional[float] = DEFAULT_SPECTRAL_TAIL_TOL

    def __post_init__(self) -> None:
        if not (self.dt > 0 and self.t_end > 0):
            raise InvalidParamsError(f"dt and t_end must be > 0: got dt={self.dt!r}, t_end={self.t_end!r}")
        if self.dt > self.t_end:
            raise InvalidParamsError(f"dt={self.dt!r} exceeds t_end={self.t_end!r}")
        if self.dt * abs(self.omega) > OSCILLATION_RESOLUTION:
            raise InvalidParamsError(
                f"dt·|omega| = {self.dt * abs(self.omega)!r} exceeds {OSCILLATION_RESOLUTION} "
                f"(dt={self.dt!r}, omega={self.omega!r})"
            )
        if int(self.save_stride) != self.save_stride or self.save_stride < 1:
            raise InvalidParamsError(f"save_stride must be a positive integer: got {self.save_stride!r}")
        steps = self.t_end / self.dt
        if abs(steps - round(steps)) > 1e-9 * max(1.0, steps):
            raise InvalidParamsError(
                f"t_end={self.t_end!r} is not an integer multiple of dt={self.dt!r}"
            )

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class Diagnostics:
    time: float
    mass: float
    hamiltonian: float
    grad_l2: float
    linf: float
    w14: float
    holder_half: float

    def as_row(self) -> List[float]:
        return [self.time, self.mass, self.hamiltonian, self.grad_l2, self.linf, self.w14, self.holder_half]


@dataclass
class RunTrace:
    params: SolverParams
    frames: List[Tuple[float, ComplexField]] = field(default_factory=list)
    diagnostics: List[Diagnostics] = field(default_factory=list)
    status: str = STATUS_COMPLETED
    status_time: Optional[float] = None
    # GradThresholdExceeded flag: first saved time with ‖∇u‖ >= grad_warn_threshold
    grad_threshold_time: Optional[float] = None
    initial_grad_warning: bool = False

    @property
    def completed(self) -> bool:
        return self.status == STATUS_COMPLETED

    @property
    def grad_threshold_exceeded(self) -> bool:
        return self.grad_threshold_time is not None

    @property
    def sup_grad(self) -> float:
        return max((d.grad_l2 for d in self.diagnostics), default=0.0)


def compute_diagnostics(
    u: ComplexField,
    time: float,
    coefficient: float,
    kind: NonlinearityKind = EXPONENTIAL,
) -> Diagnostics:
    """Mass, Hamiltonian ‖∇u‖² + potential (with the given coefficient) and the monitored norms."""
    grad = grad_l2(u)
    return Diagnostics(
        time=float(time),
        mass=norm_l2(u) ** 2,
        hamiltonian=grad * grad + potential_density(u, coefficient, kind),
        grad_l2=grad,
        linf=norm_linf(u),
        w14=norm_w14(u),
        holder_half=holder_half_norm(u),
    )


def _rotate(values: np.ndarray, weight: float, kind: NonlinearityKind) -> np.ndarray:
    if weight == 0:
        return values
    check_overflow(values, kind)
    abs2 = values.real ** 2 + values.imag ** 2
    return values * np.exp(-1j * weight * modulus_factor(abs2, kind))


def nonlinear_substep(
    u: ComplexField,
    t0: float,
    dt: float,
    profile: ThetaProfile,
    omega: float,
    kind: NonlinearityKind = EXPONENTIAL,
) -> ComplexField:
    """Exact flow of ∂t u = -iθ(ωt)·g(|u|²)·u over [t0, t0 + dt]; |u| is unchanged pointwise."""
    weight = theta_window_integral(profile, omega, t0, t0 + dt)
    return u.with_values(_rotate(u.values, weight, kind))


def strang_step(
    u: ComplexField,
    t0: float,
    dt: float,
    profile: ThetaProfile,
    omega: float,
    kind: NonlinearityKind = EXPONENTIAL,
    workspace: Optional[SpectralWorkspace] = None,
) -> ComplexField:
    """Half nonlinear, full linear, half nonlinear. A negative dt steps backwards in time."""
    ws = workspace or get_workspace(u.grid)
    half = 0.5 * dt
    values = _rotate(u.values, theta_window_integral(profile, omega, t0, t0 + half), kind)
    values = ws.propagate_values(values, dt)
    values = _rotate(values, theta_window_integral(profile, omega, t0 + half, t0 + dt), kind)
    return u.with_values(values)


FrameCallback = Callable[[int, float, ComplexField, Diagnostics], None]


def simulate(
    u0: ComplexField,
    params: SolverParams,
    profile: ThetaProfile,
    kind: NonlinearityKind = EXPONENTIAL,
    coefficient: Optional[float] = None,
    on_frame: Optional[FrameCallback] = None,
    keep_frames: bool = True,
) -> RunTrace:
    """Step from t = 0 to t_end, saving a frame every save_stride steps (and at t_end).

    coefficient weights the Hamiltonian potential in the diagnostics; it defaults to I(θ).
    Between saved frames the trailing half rotation of one step and the leading half of the next
    are applied as one rotation; both leave |u| fixed, so the fused rotation is exact.
    """
    if coefficient is None:
        coefficient = max(theta_average(profile), 0.0)
    trace = RunTrace(params=params)
    ws = get_workspace(u0.grid)
    dt = params.dt
    omega = params.omega

    def window(a: float, b: float) -> float:
        return theta_window_integral(profile, omega, a, b)

    def save(index: int, t: float, values: np.ndarray) -> bool:
        frame = ComplexField(u0.grid, values.copy())
        diag = compute_diagnostics(frame, t, coefficient, kind)
        trace.diagnostics.append(diag)
        if keep_frames:
            trace.frames.append((t, frame))
        if on_frame is not None:
            on_frame(index, t, frame, diag)
        if trace.grad_threshold_time is None and diag.grad_l2 >= params.grad_warn_threshold:
            trace.grad_threshold_time = t
            logger.warning(
                "grad_l2 = %.6g reached the threshold %.6g at t = %.6g (omega = %g)",
                diag.grad_l2, params.grad_warn_threshold, t, omega,
            )
        if params.spectral_tail_tol is not None:
            tail = spectral_tail_fraction(frame)
            if tail >= params.spectral_tail_tol:
                trace.status = STATUS_UNDER_RESOLVED
                trace.status_time = t
                logger.warning("Run under-resolved at t = %.6g: high-band energy fraction %.3g", t, tail)
                return False
        return True

    initial_grad = grad_l2(u0)
    if initial_grad >= 1.0:
        trace.initial_grad_warning = True
        logger.warning("Initial data has grad_l2 = %.6g >= 1; local theory does not cover it", initial_grad)

    values = u0.values.copy()
    frame_index = 0
    if not save(frame_index, 0.0, values):
        return trace

    n_steps = params.n_steps
    step = 0
    while step < n_steps:
        chunk = min(params.save_stride, n_steps - step)
        t0 = step * dt
        try:
            values = _rotate(values, window(t0, t0 + 0.5 * dt), kind)
            for j in range(chunk):
                values = ws.propagate_values(values, dt)
                t_mid = t0 + (j + 0.5) * dt
                t_next = t0 + (j + 1.5) * dt if j < chunk - 1 else (step + chunk) * dt
                values = _rotate(values, window(t_mid, t_next), kind)
        except OverflowGuardError as e:
            trace.status = STATUS_BLOWN_UP
            trace.status_time = t0
            logger.warning("Run blew up near t = %.6g (omega = %g): %s", t0, omega, e)
            return trace
        step += chunk
        t = step * dt
        if not np.all(np.isfinite(values)):
            trace.status = STATUS_BLOWN_UP
            trace.status_time = t
            logger.warning("Run produced non-finite values at t = %.6g (omega = %g)", t, omega)
            return trace
        frame_index += 1
        if not save(frame_index, t, values):
            return trace

    return trace


def final_field(trace: RunTrace) -> ComplexField:
    if not trace.frames:
        raise InvalidParamsError("trace kept no frames")
    return trace.frames[-1][1]


def relative_drift(values: List[float]) -> float:
    """max_t |v(t) - v(0)| / |v(0)| (absolute drift when v(0) = 0)."""
    if not values:
        return 0.0
    base = values[0]
    spread = max(abs(v - base) for v in values)
    return spread / abs(base) if base != 0 else spread
