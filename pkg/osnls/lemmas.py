"""Two small analytic utilities made executable: the ε-partition of an integrable function and the
bootstrap bound for X <= a + b·X^θ."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid

from osnls.errors import InvalidParamsError, MassBoundViolatedError

MASS_SLACK = 1e-12


@dataclass(frozen=True)
class PartitionResult:
    breakpoints: List[float]

    @property
    def J(self) -> int:
        return len(self.breakpoints) - 1


def _cumulative(samples: Sequence[float], length: float) -> Tuple[np.ndarray, np.ndarray]:
    values = np.asarray(samples, dtype=float)
    if values.ndim != 1 or len(values) < 2:
        raise InvalidParamsError(f"need >= 2 samples on the uniform grid: got shape {values.shape}")
    if not np.all(np.isfinite(values)) or np.any(values < 0):
        raise InvalidParamsError("samples must be finite and non-negative")
    if not length > 0:
        raise InvalidParamsError(f"interval length must be > 0: got {length!r}")
    x = np.linspace(0.0, length, len(values))
    return x, cumulative_trapezoid(values, x, initial=0.0)


def partition_interval(samples: Sequence[float], length: float, eps: float, mass_bound: float) -> PartitionResult:
    """Breakpoints 0 = t_0 < ... < t_J = ℓ with ∫_{t_j}^{t_j+1} f <= ε and J <= floor(M/ε) + 1.

    φ(x) = ∫_0^x f is swept once; a breakpoint is placed where φ reaches each multiple jε
    strictly below φ(ℓ), interpolating linearly inside the crossing cell.
    """
    if not eps > 0:
        raise InvalidParamsError(f"eps must be > 0: got {eps!r}")
    if not mass_bound > 0:
        raise InvalidParamsError(f"mass_bound must be > 0: got {mass_bound!r}")
    x, phi = _cumulative(samples, length)
    total = float(phi[-1])
    if total > mass_bound + MASS_SLACK:
        raise MassBoundViolatedError(f"integral {total!r} exceeds mass bound {mass_bound!r}")

    breakpoints = [0.0]
    cutoff = total - MASS_SLACK * max(1.0, total)
    k = 1
    level = eps
    while level < cutoff:
        i = int(np.searchsorted(phi, level, side="left"))
        lo, hi = phi[i - 1], phi[i]
        weight = (level - lo) / (hi - lo) if hi > lo else 1.0
        point = float(x[i - 1] + weight * (x[i] - x[i - 1]))
        if point > breakpoints[-1]:
            breakpoints.append(point)
        k += 1
        level = k * eps
    breakpoints.append(float(length))
    return PartitionResult(breakpoints)


def verify_partition(samples: Sequence[float], length: float, eps: float, mass_bound: float, result: PartitionResult) -> bool:
    """Both postconditions: the count bound and every piece <= ε plus one cell of quadrature slack."""
    x, phi = _cumulative(samples, length)
    if result.J > math.floor(mass_bound / eps) + 1:
        return False
    points = np.asarray(result.breakpoints)
    if points[0] != 0.0 or points[-1] != length or np.any(np.diff(points) <= 0):
        return False
    slack = (x[1] - x[0]) * float(np.max(samples))
    pieces = np.diff(np.interp(points, x, phi))
    return bool(np.all(pieces <= eps + slack + MASS_SLACK))


def continuity_threshold(b: float, theta_exp: float) -> float:
    """X* = (θb)^{-1/(θ-1)}, the maximiser of X - bX^θ."""
    return (theta_exp * b) ** (-1.0 / (theta_exp - 1.0))


def continuity_bound(a: float, b: float, theta_exp: float, x0: float) -> Optional[float]:
    """θa/(θ-1) when a < (1 - 1/θ)X* and X(0) <= X*; None when the hypotheses fail."""
    if not (a > 0 and b > 0 and theta_exp > 1 and x0 >= 0):
        return None
    x_star = continuity_threshold(b, theta_exp)
    if a < (1.0 - 1.0 / theta_exp) * x_star and x0 <= x_star:
        return theta_exp * a / (theta_exp - 1.0)
    return None
