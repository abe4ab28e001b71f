"""Tests for the exponential nonlinearity, its derivative components and the potential energy."""
from __future__ import annotations

import cmath
import math
import unittest

import mpmath
import numpy as np

# Run from repo root: PYTHONPATH=. python -m unittest tests.test_nonlinearity
from osnls.errors import ConfigError, DegenerateInputError, InvalidParamsError, OverflowGuardError
from osnls.grid import ComplexField, GridSpec, coordinates, gradient, norm_l2
from osnls.nonlinearity import (
    EXPONENTIAL,
    FOUR_PI,
    Monomial,
    check_overflow,
    chain_rule_gradient,
    df_components,
    f_eval,
    f_scalar,
    kind_from_dict,
    kind_to_dict,
    local_lipschitz_ratio,
    potential_density,
)

GRID = GridSpec(64, 64, 8.0 * math.pi, 8.0 * math.pi)


def _gaussian(grid: GridSpec, amplitude: float, sigma: float = 1.0, phase: float = 0.0) -> ComplexField:
    X, Y = coordinates(grid)
    # a smooth position-dependent phase exercises the complex pairing in the chain rule
    values = amplitude * np.exp(-(X ** 2 + Y ** 2) / (2.0 * sigma ** 2)) * np.exp(1j * phase * X)
    return ComplexField(grid, values)


def _point(value: complex) -> ComplexField:
    values = np.zeros(GRID.shape, dtype=complex)
    values[0, 0] = value
    return ComplexField(GRID, values)


class TestKinds(unittest.TestCase):
    def test_exponential_carries_four_pi(self) -> None:
        self.assertEqual(EXPONENTIAL.alpha0, 4.0 * math.pi)

    def test_monomial_needs_p_above_one(self) -> None:
        with self.assertRaises(InvalidParamsError):
            Monomial(1.0)

    def test_kind_from_dict(self) -> None:
        self.assertEqual(kind_from_dict({"kind": "exponential"}), EXPONENTIAL)
        self.assertEqual(kind_from_dict({"kind": "monomial", "p": 3}), Monomial(3.0))
        self.assertEqual(kind_to_dict(Monomial(5.0)), {"kind": "monomial", "p": 5.0})
        for bad in ({"kind": "cubic"}, {"kind": "monomial"}, {"kind": "exponential", "p": 2}, {"kind": "monomial", "p": 3, "q": 1}):
            with self.assertRaises(ConfigError):
                kind_from_dict(bad)


class TestFEval(unittest.TestCase):
    def test_zero_maps_to_zero(self) -> None:
        self.assertEqual(float(np.max(np.abs(f_eval(ComplexField.zeros(GRID)).values))), 0.0)

    def test_small_amplitude_matches_high_precision(self) -> None:
        mpmath.mp.dps = 50
        r = 0.1
        expected = mpmath.mpf(r) * mpmath.expm1(4 * mpmath.pi * mpmath.mpf(r) ** 2)
        got = f_eval(_point(r)).values[0, 0]
        self.assertLess(abs(got.real - float(expected)) / float(expected), 1e-14)
        self.assertEqual(got.imag, 0.0)

    def test_monomial_cubic(self) -> None:
        self.assertAlmostEqual(f_eval(_point(2.0), Monomial(3.0)).values[0, 0].real, 8.0)

    def test_gauge_covariance(self) -> None:
        u = _gaussian(GRID, 0.4)
        phase = cmath.exp(0.7j)
        left = f_eval(u.with_values(phase * u.values)).values
        right = phase * f_eval(u).values
        self.assertLess(float(np.max(np.abs(left - right))), 1e-14)

    def test_overflow_guard(self) -> None:
        too_big = math.sqrt(701.0 / FOUR_PI)
        with self.assertRaises(OverflowGuardError) as ctx:
            f_eval(_point(too_big))
        self.assertGreater(ctx.exception.exponent, 700.0)
        values = np.zeros(GRID.shape, dtype=complex)
        values[1, 1] = np.nan
        with self.assertRaises(OverflowGuardError):
            check_overflow(values)
        check_overflow(np.full(GRID.shape, 100.0), Monomial(3.0))


class TestDfComponents(unittest.TestCase):
    def test_zero_gives_zero_components(self) -> None:
        a, b = df_components(ComplexField.zeros(GRID))
        self.assertEqual(float(np.max(np.abs(a))), 0.0)
        self.assertEqual(float(np.max(np.abs(b))), 0.0)

    def test_difference_identity_for_real_values(self) -> None:
        for r in (0.05, 0.2, 0.5):
            a, b = df_components(_point(r))
            self.assertAlmostEqual(a[0, 0] - b[0, 0], math.expm1(FOUR_PI * r * r), places=12)

    def test_directional_derivative(self) -> None:
        """f(u + εh) ≈ f(u) + ε(a·h + b·(u/ū)·h̄) for complex u, h."""
        u, h, eps = 0.3 + 0.2j, 0.6 - 0.8j, 1e-6
        a, b = df_components(_point(u))
        linear = a[0, 0] * h + b[0, 0] * (u / u.conjugate()) * h.conjugate()
        numeric = (f_scalar(u + eps * h) - f_scalar(u - eps * h)) / (2.0 * eps)
        self.assertLess(abs(numeric - linear) / abs(linear), 1e-8)

    def test_monomial_components(self) -> None:
        a, b = df_components(_point(2.0), Monomial(3.0))
        self.assertAlmostEqual(a[0, 0], 2.0 * 4.0)
        self.assertAlmostEqual(b[0, 0], 1.0 * 4.0)

    def test_chain_rule_matches_spectral_gradient(self) -> None:
        # e^{4π|u|²} is much narrower than u itself; 256² keeps f(u) spectrally resolved
        u = _gaussian(GRID.refined(4), 0.6, phase=0.5)
        direct_x, direct_y = gradient(f_eval(u))
        chain_x, chain_y = chain_rule_gradient(u)
        for direct, chain in ((direct_x, chain_x), (direct_y, chain_y)):
            error = norm_l2(direct.with_values(direct.values - chain.values))
            self.assertLess(error / norm_l2(direct), 1e-7)


class TestPotential(unittest.TestCase):
    def test_zero_field_and_zero_coefficient(self) -> None:
        self.assertEqual(potential_density(ComplexField.zeros(GRID), 1.0), 0.0)
        self.assertEqual(potential_density(_gaussian(GRID, 0.5), 0.0), 0.0)

    def test_negative_coefficient_rejected(self) -> None:
        with self.assertRaises(InvalidParamsError):
            potential_density(_gaussian(GRID, 0.5), -1.0)

    def test_non_negative_and_refinement_stable(self) -> None:
        base = GridSpec(128, 128, 8.0 * math.pi, 8.0 * math.pi)
        coarse = potential_density(_gaussian(base, 0.5), 1.0)
        fine = potential_density(_gaussian(base.refined(4), 0.5), 1.0)
        self.assertGreater(coarse, 0.0)
        self.assertAlmostEqual(coarse / fine, 1.0, delta=1e-8)

    def test_small_amplitude_is_quartic(self) -> None:
        """(e^x - 1 - x)/4π ≈ x²/(8π) with x = 4π|u|², so ∫ = 2π·∫|u|⁴ to leading order."""
        u = _gaussian(GRID, 1e-4)
        quartic = 2.0 * math.pi * float(np.sum(np.abs(u.values) ** 4)) * GRID.cell_area
        self.assertAlmostEqual(potential_density(u, 1.0) / quartic, 1.0, delta=1e-6)

    def test_monomial_potential(self) -> None:
        u = _gaussian(GRID, 0.5)
        expected = 2.0 / 4.0 * float(np.sum(np.abs(u.values) ** 4)) * GRID.cell_area
        self.assertAlmostEqual(potential_density(u, 1.0, Monomial(3.0)), expected, places=12)


class TestLipschitzRatio(unittest.TestCase):
    def test_real_pair_is_finite_positive(self) -> None:
        ratio = local_lipschitz_ratio(0.1, -0.1, 0.1)
        self.assertTrue(math.isfinite(ratio))
        self.assertGreater(ratio, 0.0)

    def test_phase_invariance(self) -> None:
        u, v, rotation = 0.3 + 0.1j, -0.2 + 0.4j, cmath.exp(1.3j)
        self.assertAlmostEqual(
            local_lipschitz_ratio(u, v, 0.1), local_lipschitz_ratio(rotation * u, rotation * v, 0.1), places=12
        )

    def test_equal_arguments_are_degenerate(self) -> None:
        with self.assertRaises(DegenerateInputError):
            local_lipschitz_ratio(0.2, 0.2, 0.1)

    def test_sampled_maximum_is_stable(self) -> None:
        rng = np.random.default_rng(5)

        def sampled_max(count: int) -> float:
            r = np.sqrt(rng.uniform(0.0, 1.0, (count, 2)))
            phi = rng.uniform(0.0, 2.0 * math.pi, (count, 2))
            z = r * np.exp(1j * phi)
            return max(local_lipschitz_ratio(complex(p), complex(q), 0.1) for p, q in z)

        first = sampled_max(50000)
        second = max(first, sampled_max(50000))
        self.assertTrue(math.isfinite(second))
        self.assertLess(second / first, 1.05)


if __name__ == "__main__":
    unittest.main()
