"""Periodic torus geometry, spectral transforms and the spatial norms used by the solver and verifiers.

Fields are stored as (ny, nx) C-contiguous complex128 arrays: axis 0 is y, axis 1 is x,
so the flattened layout is row-major with x fastest.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Tuple

import numpy as np

from osnls.errors import InvalidParamsError

MIN_POINTS = 16
HOLDER_STENCIL_RADIUS = 8
HIGH_BAND_FRACTION = 2.0 / 3.0
# Propagator tables kept per workspace; a run only ever needs a handful of step sizes.
PROPAGATOR_CACHE_SIZE = 16


def _is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    nx: int
    ny: int
    lx: float
    ly: float

    def __post_init__(self) -> None:
        for name, n in (("nx", self.nx), ("ny", self.ny)):
            if not isinstance(n, (int, np.integer)) or not _is_power_of_two(int(n)) or n < MIN_POINTS:
                raise InvalidParamsError(
                    f"{name} must be a power of two >= {MIN_POINTS}: got {n!r}"
                )
        for name, length in (("lx", self.lx), ("ly", self.ly)):
            if not (length > 0 and math.isfinite(length)):
                raise InvalidParamsError(f"{name} must be a positive finite length: got {length!r}")

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.ny, self.nx)

    def refined(self, factor: int = 2) -> "GridSpec":
        """Same box, factor times more points per axis."""
        return GridSpec(self.nx * factor, self.ny * factor, self.lx, self.ly)

    def to_dict(self) -> Dict[str, float]:
        return {"nx": self.nx, "ny": self.ny, "lx": self.lx, "ly": self.ly}


def coordinates(grid: GridSpec) -> Tuple[np.ndarray, np.ndarray]:
    """Cell coordinates x_j = (j - nx/2)·dx (same for y), as (ny, nx) arrays; x = 0 is a grid point."""
    x = (np.arange(grid.nx) - grid.nx // 2) * grid.dx
    y = (np.arange(grid.ny) - grid.ny // 2) * grid.dy
    return np.meshgrid(x, y, indexing="xy")


@dataclass
class ComplexField:
    grid: GridSpec
    values: np.ndarray
    blown_up: bool = False

    def __post_init__(self) -> None:
        values = np.ascontiguousarray(self.values, dtype=np.complex128)
        if values.shape != self.grid.shape:
            raise InvalidParamsError(
                f"field shape {values.shape} does not match grid (ny, nx) = {self.grid.shape}"
            )
        if not self.blown_up and not np.all(np.isfinite(values)):
            raise InvalidParamsError("field has non-finite entries but is not flagged as blown up")
        self.values = values

    @classmethod
    def zeros(cls, grid: GridSpec) -> "ComplexField":
        return cls(grid, np.zeros(grid.shape, dtype=np.complex128))

    def with_values(self, values: np.ndarray) -> "ComplexField":
        return ComplexField(self.grid, values)

    def copy(self) -> "ComplexField":
        return ComplexField(self.grid, self.values.copy(), self.blown_up)


class SpectralWorkspace:
    """Wavenumber tables and cached Schrödinger multipliers for one grid.

    One owner at a time; create one per thread or process when running in parallel.
    """

    def __init__(self, grid: GridSpec) -> None:
        self.grid = grid
        # k = 2π·m/L with signed mode m in numpy FFT order, so k[0] = 0
        self.kx = 2.0 * np.pi * np.fft.fftfreq(grid.nx, d=grid.dx)
        self.ky = 2.0 * np.pi * np.fft.fftfreq(grid.ny, d=grid.dy)
        self.kx_grid = self.kx[np.newaxis, :]
        self.ky_grid = self.ky[:, np.newaxis]
        self.k2 = self.kx_grid ** 2 + self.ky_grid ** 2
        mx = np.abs(np.fft.fftfreq(grid.nx) * grid.nx)[np.newaxis, :] / (grid.nx / 2)
        my = np.abs(np.fft.fftfreq(grid.ny) * grid.ny)[:, np.newaxis] / (grid.ny / 2)
        self.high_band = np.maximum(mx, my) > HIGH_BAND_FRACTION
        self._propagators: Dict[float, np.ndarray] = {}

    def forward(self, values: np.ndarray) -> np.ndarray:
        return np.fft.fft2(values)

    def inverse(self, spectrum: np.ndarray) -> np.ndarray:
        return np.fft.ifft2(spectrum)

    def propagator(self, t: float) -> np.ndarray:
        """Fourier multiplier exp(-i·|k|²·t) of e^{itΔ}."""
        table = self._propagators.get(t)
        if table is None:
            table = np.exp(-1j * self.k2 * t)
            if len(self._propagators) >= PROPAGATOR_CACHE_SIZE:
                self._propagators.clear()
            self._propagators[t] = table
        return table

    def propagate_values(self, values: np.ndarray, t: float) -> np.ndarray:
        return self.inverse(self.forward(values) * self.propagator(t))

    def gradient_values(self, values: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        spectrum = self.forward(values)
        return (
            self.inverse(1j * self.kx_grid * spectrum),
            self.inverse(1j * self.ky_grid * spectrum),
        )

    def grad_l2_squared(self, values: np.ndarray) -> float:
        """‖∇u‖²_{L²} via Parseval."""
        spectrum = self.forward(values)
        total = float(np.sum(self.k2 * np.abs(spectrum) ** 2))
        return total * self.grid.cell_area / (self.grid.nx * self.grid.ny)


@lru_cache(maxsize=8)
def get_workspace(grid: GridSpec) -> SpectralWorkspace:
    """Process-local shared workspace for a grid."""
    return SpectralWorkspace(grid)


# --- transforms and operators -------------------------------------------------


def fft_roundtrip(field: ComplexField) -> ComplexField:
    ws = get_workspace(field.grid)
    return field.with_values(ws.inverse(ws.forward(field.values)))


def gradient(field: ComplexField) -> Tuple[ComplexField, ComplexField]:
    """Spectral (∂x u, ∂y u)."""
    dux, duy = get_workspace(field.grid).gradient_values(field.values)
    return field.with_values(dux), field.with_values(duy)


def free_propagator(field: ComplexField, t: float) -> ComplexField:
    """e^{itΔ} applied exactly on the torus."""
    return field.with_values(get_workspace(field.grid).propagate_values(field.values, t))


def spectral_tail_fraction(field: ComplexField) -> float:
    """Share of spectral energy in the highest third of the resolved band."""
    ws = get_workspace(field.grid)
    energy = np.abs(ws.forward(field.values)) ** 2
    total = float(np.sum(energy))
    if total == 0.0:
        return 0.0
    return float(np.sum(energy[ws.high_band])) / total


# --- norms --------------------------------------------------------------------


def norm_l2(field: ComplexField) -> float:
    return math.sqrt(float(np.sum(np.abs(field.values) ** 2)) * field.grid.cell_area)


def norm_l2_spectral(field: ComplexField) -> float:
    """Same quantity as norm_l2, evaluated on the Fourier side."""
    g = field.grid
    spectrum = get_workspace(g).forward(field.values)
    return math.sqrt(float(np.sum(np.abs(spectrum) ** 2)) * g.cell_area / (g.nx * g.ny))


def _lp_of_values(values: np.ndarray, p: float, cell_area: float) -> float:
    return (float(np.sum(np.abs(values) ** p)) * cell_area) ** (1.0 / p)


def norm_lp(field: ComplexField, p: float) -> float:
    if not (p >= 1 and math.isfinite(p)):
        raise InvalidParamsError(f"norm_lp needs a finite p >= 1: got {p!r}")
    return _lp_of_values(field.values, p, field.grid.cell_area)


def norm_linf(field: ComplexField) -> float:
    return float(np.max(np.abs(field.values)))


def grad_l2(field: ComplexField) -> float:
    return math.sqrt(get_workspace(field.grid).grad_l2_squared(field.values))


def norm_mu(field: ComplexField, mu: float) -> float:
    """‖u‖_μ = sqrt(‖∇u‖² + μ²‖u‖²)."""
    if not 0 < mu <= 1:
        raise InvalidParamsError(f"mu must lie in (0, 1]: got {mu!r}")
    grad2 = get_workspace(field.grid).grad_l2_squared(field.values)
    return math.sqrt(grad2 + mu * mu * norm_l2(field) ** 2)


def norm_h1(field: ComplexField) -> float:
    return norm_mu(field, 1.0)


def norm_w1p(field: ComplexField, p: float) -> float:
    """(‖u‖^p_{L^p} + ‖∂x u‖^p_{L^p} + ‖∂y u‖^p_{L^p})^{1/p}; p = ∞ takes the max of the three sup norms."""
    dux, duy = get_workspace(field.grid).gradient_values(field.values)
    if math.isinf(p):
        return max(float(np.max(np.abs(v))) for v in (field.values, dux, duy))
    area = field.grid.cell_area
    total = sum(float(np.sum(np.abs(v) ** p)) for v in (field.values, dux, duy)) * area
    return total ** (1.0 / p)


def norm_w14(field: ComplexField) -> float:
    return norm_w1p(field, 4.0)


def holder_seminorm(field: ComplexField, beta: float = 0.5, radius: int = HOLDER_STENCIL_RADIUS) -> float:
    """max over stencil offsets h of |u(x) - u(x+h)| / |h|^β, periodic wrap."""
    if not 0 < beta < 1:
        raise InvalidParamsError(f"beta must lie in (0, 1): got {beta!r}")
    u = field.values
    g = field.grid
    best = 0.0
    # half-plane of offsets: with periodic wrap, h and -h give the same differences
    for b in range(0, radius + 1):
        row_shift = np.roll(u, b, axis=0)
        for a in range(-radius, radius + 1):
            if b == 0 and a <= 0:
                continue
            shifted = np.roll(row_shift, a, axis=1)
            dist = math.hypot(a * g.dx, b * g.dy)
            quotient = float(np.max(np.abs(u - shifted))) / dist ** beta
            if quotient > best:
                best = quotient
    return best


def holder_norm(field: ComplexField, beta: float = 0.5) -> float:
    return norm_linf(field) + holder_seminorm(field, beta)


def holder_half_norm(field: ComplexField) -> float:
    return holder_norm(field, 0.5)
