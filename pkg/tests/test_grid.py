"""Tests for torus geometry, spectral operators and spatial norms."""
from __future__ import annotations

import math
import unittest

import numpy as np
from numpy.testing import assert_allclose

# Run from repo root: PYTHONPATH=. python -m unittest tests.test_grid
from osnls.errors import InvalidParamsError
from osnls.grid import (
    ComplexField,
    GridSpec,
    coordinates,
    fft_roundtrip,
    free_propagator,
    get_workspace,
    grad_l2,
    gradient,
    holder_half_norm,
    holder_seminorm,
    norm_h1,
    norm_l2,
    norm_l2_spectral,
    norm_linf,
    norm_lp,
    norm_mu,
    norm_w14,
    norm_w1p,
    spectral_tail_fraction,
)

GRID = GridSpec(64, 64, 8.0 * math.pi, 8.0 * math.pi)


def _gaussian(grid: GridSpec, amplitude: float = 0.5, sigma: float = 1.0) -> ComplexField:
    X, Y = coordinates(grid)
    return ComplexField(grid, amplitude * np.exp(-(X ** 2 + Y ** 2) / (2.0 * sigma ** 2)))


def _mode(grid: GridSpec, mx: int, my: int = 0, amplitude: float = 1.0) -> ComplexField:
    X, Y = coordinates(grid)
    phase = 2.0 * math.pi * (mx * X / grid.lx + my * Y / grid.ly)
    return ComplexField(grid, amplitude * np.exp(1j * phase))


def _random(grid: GridSpec, seed: int = 0) -> ComplexField:
    rng = np.random.default_rng(seed)
    return ComplexField(grid, rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape))


def _exhaustive_holder(field: ComplexField, beta: float) -> float:
    """All offsets with minimal-image distances on the torus."""
    g = field.grid
    u = field.values
    best = 0.0
    for b in range(g.ny):
        row_shift = np.roll(u, b, axis=0)
        for a in range(g.nx):
            if a == 0 and b == 0:
                continue
            dist = math.hypot(min(a, g.nx - a) * g.dx, min(b, g.ny - b) * g.dy)
            best = max(best, float(np.max(np.abs(u - np.roll(row_shift, a, axis=1)))) / dist ** beta)
    return best


class TestGridSpec(unittest.TestCase):
    def test_rejects_non_power_of_two_and_small_sizes(self) -> None:
        for nx in (48, 8, 0):
            with self.assertRaises(InvalidParamsError):
                GridSpec(nx, 64, 1.0, 1.0)

    def test_rejects_non_positive_length(self) -> None:
        with self.assertRaises(InvalidParamsError):
            GridSpec(64, 64, 0.0, 1.0)
        with self.assertRaises(InvalidParamsError):
            GridSpec(64, 64, 1.0, -2.0)

    def test_cell_sizes_and_refinement(self) -> None:
        g = GridSpec(64, 32, 4.0, 2.0)
        self.assertEqual(g.shape, (32, 64))
        self.assertAlmostEqual(g.dx, 4.0 / 64)
        self.assertAlmostEqual(g.dy, 2.0 / 32)
        self.assertEqual(g.refined(2), GridSpec(128, 64, 4.0, 2.0))

    def test_origin_is_a_grid_point(self) -> None:
        X, Y = coordinates(GRID)
        self.assertEqual(X[GRID.ny // 2, GRID.nx // 2], 0.0)
        self.assertEqual(Y[GRID.ny // 2, GRID.nx // 2], 0.0)

    def test_wavenumber_tables_start_at_zero(self) -> None:
        ws = get_workspace(GRID)
        self.assertEqual(len(ws.kx), GRID.nx)
        self.assertEqual(len(ws.ky), GRID.ny)
        self.assertEqual(ws.kx[0], 0.0)
        self.assertEqual(ws.ky[0], 0.0)


class TestComplexField(unittest.TestCase):
    def test_shape_mismatch_raises(self) -> None:
        with self.assertRaises(InvalidParamsError):
            ComplexField(GRID, np.zeros((32, 64)))

    def test_non_finite_needs_blown_up_flag(self) -> None:
        values = np.zeros(GRID.shape, dtype=complex)
        values[0, 0] = np.nan
        with self.assertRaises(InvalidParamsError):
            ComplexField(GRID, values)
        self.assertTrue(ComplexField(GRID, values, blown_up=True).blown_up)


class TestSpectralOperators(unittest.TestCase):
    def test_fft_roundtrip_random_field(self) -> None:
        field = _random(GridSpec(32, 32, 1.0, 1.0))
        assert_allclose(fft_roundtrip(field).values, field.values, rtol=0, atol=1e-12)

    def test_fft_roundtrip_zero(self) -> None:
        zero = ComplexField.zeros(GRID)
        self.assertEqual(float(np.max(np.abs(fft_roundtrip(zero).values))), 0.0)

    def test_gradient_of_single_mode(self) -> None:
        u = _mode(GRID, 1)
        dux, duy = gradient(u)
        assert_allclose(dux.values, 1j * 2.0 * math.pi / GRID.lx * u.values, atol=1e-12)
        assert_allclose(duy.values, 0.0, atol=1e-12)

    def test_gradient_of_constant_is_zero(self) -> None:
        dux, duy = gradient(ComplexField(GRID, np.full(GRID.shape, 0.3 + 0.1j)))
        self.assertLess(float(np.max(np.abs(dux.values))), 1e-14)
        self.assertLess(float(np.max(np.abs(duy.values))), 1e-14)

    def test_gradient_matches_finite_differences(self) -> None:
        u = _gaussian(GRID)
        dux, _ = gradient(u)
        fd = (np.roll(u.values, -1, axis=1) - np.roll(u.values, 1, axis=1)) / (2.0 * GRID.dx)
        # centred differences are second order: error ~ dx²/6·|∂x³u|
        self.assertLess(float(np.max(np.abs(dux.values - fd))), GRID.dx ** 2)

    def test_free_propagator_identity_at_zero(self) -> None:
        u = _random(GRID)
        assert_allclose(free_propagator(u, 0.0).values, u.values, atol=1e-13)

    def test_free_propagator_is_isometry_and_group(self) -> None:
        u = _random(GRID, seed=3)
        a = free_propagator(free_propagator(u, 0.3), 0.45)
        b = free_propagator(u, 0.75)
        self.assertAlmostEqual(norm_l2(b) / norm_l2(u), 1.0, delta=1e-12)
        self.assertLess(norm_l2(a.with_values(a.values - b.values)) / norm_l2(u), 1e-12)

    def test_free_gaussian_matches_closed_form(self) -> None:
        sigma2, t, amplitude = 1.0, 0.1, 0.5
        u0 = _gaussian(GRID, amplitude)
        X, Y = coordinates(GRID)
        s = sigma2 + 2j * t
        exact = amplitude * sigma2 / s * np.exp(-(X ** 2 + Y ** 2) / (2.0 * s))
        self.assertLess(float(np.max(np.abs(free_propagator(u0, t).values - exact))), 1e-8)

    def test_gradient_commutes_with_propagator(self) -> None:
        u = _gaussian(GRID)
        left, _ = gradient(free_propagator(u, 0.2))
        right = free_propagator(gradient(u)[0], 0.2)
        self.assertLess(float(np.max(np.abs(left.values - right.values))), 1e-11)

    def test_spectral_tail_fraction(self) -> None:
        self.assertLess(spectral_tail_fraction(_mode(GRID, 1)), 1e-20)
        self.assertAlmostEqual(spectral_tail_fraction(_mode(GRID, GRID.nx // 2 - 1)), 1.0)
        self.assertEqual(spectral_tail_fraction(ComplexField.zeros(GRID)), 0.0)
        self.assertLess(spectral_tail_fraction(_gaussian(GRID)), 1e-10)


class TestNorms(unittest.TestCase):
    def test_constant_field_norms(self) -> None:
        c = 0.7
        u = ComplexField(GRID, np.full(GRID.shape, c))
        area = GRID.lx * GRID.ly
        self.assertAlmostEqual(norm_l2(u), c * math.sqrt(area), places=10)
        self.assertAlmostEqual(norm_lp(u, 3.0), c * area ** (1.0 / 3.0), places=10)
        self.assertAlmostEqual(norm_w14(u), c * area ** 0.25, places=10)
        self.assertAlmostEqual(norm_linf(u), c)

    def test_gaussian_l2_matches_analytic(self) -> None:
        self.assertAlmostEqual(norm_l2(_gaussian(GRID, 0.5)), 0.5 * math.sqrt(math.pi), delta=1e-10)

    def test_parseval(self) -> None:
        u = _random(GRID, seed=7)
        self.assertAlmostEqual(norm_l2(u) / norm_l2_spectral(u), 1.0, delta=1e-12)

    def test_single_mode_gradient_energy(self) -> None:
        u = _mode(GRID, 1)
        expected = (2.0 * math.pi / GRID.lx) ** 2 * GRID.lx * GRID.ly
        self.assertAlmostEqual(grad_l2(u) ** 2 / expected, 1.0, delta=1e-12)

    def test_norm_mu_at_one_is_h1_and_monotone(self) -> None:
        u = _gaussian(GRID)
        self.assertEqual(norm_mu(u, 1.0), norm_h1(u))
        values = [norm_mu(u, mu) for mu in (0.1, 0.4, 0.7, 1.0)]
        self.assertEqual(values, sorted(values))
        self.assertEqual(norm_h1(ComplexField.zeros(GRID)), 0.0)
        with self.assertRaises(InvalidParamsError):
            norm_mu(u, 0.0)

    def test_norm_lp_rejects_infinite_p(self) -> None:
        with self.assertRaises(InvalidParamsError):
            norm_lp(_gaussian(GRID), math.inf)

    def test_w1p_at_infinity_is_max_of_sup_norms(self) -> None:
        u = _mode(GRID, 2, amplitude=0.5)
        k = 2.0 * math.pi * 2 / GRID.lx
        self.assertAlmostEqual(norm_w1p(u, math.inf), 0.5 * max(1.0, k), places=12)

    def test_w14_gaussian_stable_under_refinement(self) -> None:
        coarse = norm_w14(_gaussian(GRID))
        fine = norm_w14(_gaussian(GRID.refined(4)))
        self.assertAlmostEqual(coarse / fine, 1.0, delta=1e-6)


class TestHolder(unittest.TestCase):
    def test_constant_and_zero(self) -> None:
        self.assertAlmostEqual(holder_half_norm(ComplexField(GRID, np.full(GRID.shape, -0.4))), 0.4)
        self.assertEqual(holder_half_norm(ComplexField.zeros(GRID)), 0.0)

    def test_rough_field_matches_exhaustive_pairs(self) -> None:
        grid = GridSpec(32, 32, 1.0, 1.0)
        rng = np.random.default_rng(11)
        u = ComplexField(grid, rng.uniform(-1.0, 1.0, grid.shape))
        stencil = holder_seminorm(u, 0.5)
        exhaustive = _exhaustive_holder(u, 0.5)
        self.assertLessEqual(stencil, exhaustive * (1.0 + 1e-12))
        self.assertGreaterEqual(stencil, 0.95 * exhaustive)

    def test_smooth_sine_is_bounded_by_exhaustive_pairs(self) -> None:
        """Long-wave data peaks beyond the stencil radius; the stencil value is a lower bound."""
        X, _ = coordinates(GRID)
        u = ComplexField(GRID, np.sin(2.0 * math.pi * X / GRID.lx))
        self.assertLessEqual(holder_seminorm(u, 0.5), _exhaustive_holder(u, 0.5) * (1.0 + 1e-12))

    def test_holder_norm_dominates_sup_norm(self) -> None:
        for seed in range(3):
            u = _random(GRID, seed)
            self.assertGreaterEqual(holder_half_norm(u), norm_linf(u))

    def test_beta_out_of_range(self) -> None:
        with self.assertRaises(InvalidParamsError):
            holder_seminorm(_gaussian(GRID), 1.0)


if __name__ == "__main__":
    unittest.main()
