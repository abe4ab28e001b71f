"""Tests for initial-data families and the criticality gate."""
from __future__ import annotations

import math
import unittest

import numpy as np

# Run from repo root: PYTHONPATH=. python -m unittest tests.test_initial_data
from osnls.analysis import SUBCRITICAL, SUPERCRITICAL
from osnls.errors import ConfigError, SupercriticalInitialDataError
from osnls.grid import GridSpec, coordinates
from osnls.initial_data import (
    DEFAULT_DESCRIPTOR,
    build_initial_data,
    meets_acceptance_bounds,
    normalize_descriptor,
    sample_initial_data,
)

GRID = GridSpec(64, 64, 8.0 * math.pi, 8.0 * math.pi)


class TestNormalizeDescriptor(unittest.TestCase):
    def test_defaults_are_filled(self) -> None:
        d = normalize_descriptor({"family": "gaussian", "amplitude": 0.2})
        self.assertEqual(d, {"family": "gaussian", "amplitude": 0.2, "sigma": 1.5, "center": [0.0, 0.0]})

    def test_rejections(self) -> None:
        for descriptor in (
            {"family": "triangle"},
            {},
            {"family": "gaussian", "width": 1.0},
            {"family": "gaussian", "sigma": 0.0},
            {"family": "bump", "radius": -1.0},
            {"family": "moser", "n": 2.5},
            {"family": "mixture", "count": 0},
            {"family": "gaussian", "center": [1.0]},
            "gaussian",
        ):
            with self.assertRaises(ConfigError):
                normalize_descriptor(descriptor)


class TestSampleInitialData(unittest.TestCase):
    def test_zero_family(self) -> None:
        u = sample_initial_data({"family": "zero"}, GRID)
        self.assertFalse(np.any(u.values))

    def test_gaussian_peak_at_centre(self) -> None:
        u = sample_initial_data(DEFAULT_DESCRIPTOR, GRID)
        self.assertEqual(u.values[GRID.ny // 2, GRID.nx // 2], 0.3)

    def test_translation_is_a_grid_roll(self) -> None:
        base = sample_initial_data({"family": "gaussian"}, GRID)
        shifted = sample_initial_data({"family": "gaussian", "center": [3 * GRID.dx, 5 * GRID.dy]}, GRID)
        np.testing.assert_allclose(shifted.values, np.roll(base.values, (5, 3), axis=(0, 1)), atol=1e-14)

    def test_centre_near_edge_wraps(self) -> None:
        u = sample_initial_data({"family": "gaussian", "center": [GRID.lx / 2.0 - GRID.dx, 0.0]}, GRID)
        row = u.values[GRID.ny // 2]
        self.assertAlmostEqual(abs(row[0]), abs(row[-2]), places=12)

    def test_bump_support_and_peak(self) -> None:
        u = sample_initial_data({"family": "bump", "amplitude": 0.3, "radius": 2.0}, GRID)
        X, Y = coordinates(GRID)
        self.assertEqual(float(np.max(np.abs(u.values[np.hypot(X, Y) >= 2.0]))), 0.0)
        self.assertAlmostEqual(float(np.max(np.abs(u.values))), 0.3)

    def test_mode_has_constant_modulus(self) -> None:
        u = sample_initial_data({"family": "mode", "amplitude": 0.2, "mx": 2, "my": 1}, GRID)
        np.testing.assert_allclose(np.abs(u.values), 0.2, rtol=1e-14)

    def test_moser_family(self) -> None:
        grid = GridSpec(256, 256, 4.0, 4.0)
        u = sample_initial_data({"family": "moser", "n": 4}, grid)
        self.assertAlmostEqual(u.values[grid.ny // 2, grid.nx // 2].real, math.sqrt(math.log(4) / (2.0 * math.pi)))


    def test_mixture_follows_its_seed(self) -> None:
        a = sample_initial_data({"family": "mixture", "seed": 3}, GRID)
        b = sample_initial_data({"family": "mixture", "seed": 3}, GRID)
        c = sample_initial_data({"family": "mixture", "seed": 4}, GRID)
        np.testing.assert_array_equal(a.values, b.values)
        self.assertGreater(float(np.max(np.abs(a.values - c.values))), 1e-3)
        self.assertLessEqual(float(np.max(np.abs(a.values))), 0.3 + 1e-12)
        self.assertGreater(float(np.max(np.abs(np.angle(a.values[np.abs(a.values) > 1e-3])))), 0.0)

class TestBuildInitialData(unittest.TestCase):
    def test_default_is_subcritical_with_margin(self) -> None:
        prepared = build_initial_data(DEFAULT_DESCRIPTOR, GRID)
        self.assertEqual(prepared.criticality.label, SUBCRITICAL)
        self.assertTrue(meets_acceptance_bounds(prepared))
        self.assertAlmostEqual(prepared.grad_l2, 0.3 * math.sqrt(math.pi), delta=1e-8)
        self.assertAlmostEqual(prepared.criticality.hamiltonian, 0.52, delta=0.01)

    def test_large_gaussian_rejected_without_override(self) -> None:
        descriptor = {"family": "gaussian", "amplitude": 0.5}
        with self.assertRaises(SupercriticalInitialDataError):
            build_initial_data(descriptor, GRID)
        with self.assertLogs("osnls.initial_data", level="WARNING"):
            prepared = build_initial_data(descriptor, GRID, allow_supercritical=True)
        self.assertEqual(prepared.criticality.label, SUPERCRITICAL)
        self.assertFalse(meets_acceptance_bounds(prepared))

    def test_zero_coefficient_ignores_potential(self) -> None:
        prepared = build_initial_data({"family": "gaussian", "amplitude": 0.5}, GRID, coefficient=0.0)
        self.assertAlmostEqual(prepared.criticality.hamiltonian, 0.25 * math.pi, delta=1e-8)


if __name__ == "__main__":
    unittest.main()
