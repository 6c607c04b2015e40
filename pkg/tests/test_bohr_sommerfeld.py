#!/usr/bin/env python3

import math

import numpy as np

from prequant.pq_bundle.pq_connection import sphere_monopole, torus4_connection, torus_connection
from prequant.pq_bundle.pq_gauge import Pq_Gauge_Function, apply_gauge
from prequant.pq_exceptions import (
    ChartMismatchError,
    ContractError,
    DomainError,
    NonIntegralClassError,
    SingularLevelError,
)
from prequant.pq_geometry.pq_charts import DISK, SPHERE_CYL, TORUS
from prequant.pq_quantization.pq_bohr_sommerfeld import (
    bs_spectrum,
    independence_experiment,
    integral_leaf_agreement,
    leaf_holonomy,
    random_sphere_potentials,
    riemann_roch_surface,
    spectrum_deviation,
    sphere_trig_potential,
    torus_counterexample,
)
from prequant.pq_quantization.pq_fibration import sphere_height_fibration, torus4_fibration, torus_linear_fibration
from prequant.pq_symplectic.pq_linear import Pq_Symplectic_Form

from .base_tmpl import BaseTmpl


class TestFibration(BaseTmpl):
    def test_sphere_leaves(self):
        fib = sphere_height_fibration()
        (north,) = fib.leaf(0.3)
        (south,) = fib.leaf(-0.3)
        self.assertEqual(north.region_schedule[0].region, "N")
        self.assertEqual(south.region_schedule[0].region, "S")
        self.assertRaises(SingularLevelError, fib.leaf, 1.0)
        self.assertRaises(DomainError, fib.leaf, 1.5)

    def test_grid(self):
        sphere = sphere_height_fibration().grid(0.1)
        self.assertGreater(sphere[0], -1.0)
        self.assertLess(sphere[-1], 1.0)
        self.assertLessEqual(float(np.max(np.diff(sphere))), 0.1)
        torus = torus_linear_fibration().grid(0.5)
        self.assertEqual(torus[0], 0.0)
        self.assertAlmostEqual(torus[-1], 2 * math.pi)
        self.assertRaises(ValueError, torus_linear_fibration().grid, 0.0)

    def test_reduce(self):
        fib = torus_linear_fibration()
        self.assertAlmostEqual(fib.reduce(2 * math.pi + 0.25), 0.25)
        self.assertEqual(sphere_height_fibration().reduce(0.4), 0.4)


class TestSphereSpectrum(BaseTmpl):
    def test_monopole_levels(self):
        fib = sphere_height_fibration()
        for k in (1, 2, 3):
            spectrum = bs_spectrum(sphere_monopole(k), fib)
            expected = [n / k for n in range(-k + 1, k)]
            np.testing.assert_allclose(spectrum.regular_levels, expected, atol=1e-8)
            self.assertEqual(spectrum.singular_levels, (-1.0, 1.0))
            self.assertEqual(spectrum.count, 2 * k + 1)
            self.assertTrue(all(r <= 1e-6 for r in spectrum.residuals))
            self.assertFalse(spectrum.is_continuum)

    def test_rows(self):
        spectrum = bs_spectrum(sphere_monopole(1), sphere_height_fibration())
        rows = spectrum.rows()
        self.assertEqual([row[0] for row in rows], sorted(row[0] for row in rows))
        self.assertEqual(len(rows), 3)
        self.assertTrue(math.isnan(rows[0][1]))
        self.assertAlmostEqual(rows[1][1], 1.0, places=6)

    def test_leaf_holonomy(self):
        hol = leaf_holonomy(sphere_monopole(2), sphere_height_fibration(), 0.1)
        self.assertAlmostEqual(hol, np.exp(2j * math.pi * 0.2), places=10)
        self.assertRaises(ChartMismatchError, leaf_holonomy, torus_connection(1), sphere_height_fibration(), 0.1)

    def test_independence_of_exact_shifts(self):
        conn = sphere_monopole(1)
        fib = sphere_height_fibration()
        perturbations = [
            sphere_trig_potential(np.full((2, 2, 2), 0.3), SPHERE_CYL),
            sphere_trig_potential([[[0.2, -0.1], [0.4, 0.0]], [[0.0, 0.0], [-0.3, 0.2]]], SPHERE_CYL),
        ]
        report = independence_experiment(conn, fib, perturbations, grid_step=0.02)
        self.assertEqual(len(report.spectra), 2)
        self.assertSmall(report.max_deviation, 1e-6)
        self.assertRaises(ContractError, independence_experiment, torus_connection(1), torus_linear_fibration(), [])

    def test_integral_leaf_agreement(self):
        conn = sphere_monopole(2)
        psi = sphere_trig_potential(np.full((2, 2, 2), 0.3), SPHERE_CYL)
        gauged = apply_gauge(conn, Pq_Gauge_Function.from_potential(psi, SPHERE_CYL))
        levels = [-0.5, -0.25, 0.0, 0.3, 0.5]
        self.assertTrue(integral_leaf_agreement(conn, gauged, sphere_height_fibration(), levels))
        self.assertFalse(integral_leaf_agreement(conn, sphere_monopole(1), sphere_height_fibration(), [0.5]))


class TestTorusSpectrum(BaseTmpl):
    def test_degree_levels(self):
        fib = torus_linear_fibration()
        np.testing.assert_allclose(bs_spectrum(torus_connection(1), fib).regular_levels, [0.0], atol=1e-8)
        np.testing.assert_allclose(
            bs_spectrum(torus_connection(3), fib).regular_levels, [0.0, 2 * math.pi / 3, 4 * math.pi / 3], atol=1e-8
        )

    def test_flat_connection_is_continuum(self):
        spectrum = bs_spectrum(torus_connection(0), torus_linear_fibration())
        self.assertTrue(spectrum.is_continuum)
        self.assertEqual(spectrum.regular_levels, ())

    def test_closed_shift_moves_levels(self):
        conn = torus_connection(1)
        fib = torus_linear_fibration()
        report = torus_counterexample(conn, fib, [0.25, 1.0])
        self.assertTrue(report.is_consistent)
        shifted, integral = report.outcomes
        self.assertTrue(shifted.is_changed)
        np.testing.assert_allclose(shifted.spectrum.regular_levels, [math.pi / 2], atol=1e-8)
        self.assertFalse(integral.is_changed)
        self.assertLessEqual(spectrum_deviation(report.reference, integral.spectrum), 1e-8)
        self.assertRaises(DomainError, torus_counterexample, sphere_monopole(1), sphere_height_fibration(), [0.5])

    def test_spectrum_deviation(self):
        fib = torus_linear_fibration()
        one = bs_spectrum(torus_connection(1), fib)
        three = bs_spectrum(torus_connection(3), fib)
        self.assertEqual(spectrum_deviation(one, three), np.inf)
        self.assertEqual(spectrum_deviation(one, one), 0.0)


class TestProductTorusSpectrum(BaseTmpl):
    def test_leaf_has_two_generators(self):
        b, fixed = 0.8, 1.0
        first, second = leaf_holonomy(torus4_connection(1, 0.25), torus4_fibration(fixed), b)
        self.assertAlmostEqual(first, np.exp(1j * (2 * math.pi * 0.25 - b)), places=8)
        self.assertAlmostEqual(second, np.exp(-1j * fixed), places=8)
        self.assertEqual(len(torus4_fibration().leaf(b)), 2)

    def test_both_generators_must_be_trivial(self):
        conn = torus4_connection(1)
        trivial = bs_spectrum(conn, torus4_fibration(0.0), grid_step=0.05)
        np.testing.assert_allclose(trivial.regular_levels, [0.0], atol=1e-8)
        self.assertSmall(max(trivial.residuals), 1e-8)
        # the theta1 loop alone still has an integral leaf at b = 0
        self.assertAlmostEqual(leaf_holonomy(conn, torus4_fibration(1.0), 0.0)[0], 1.0, places=8)
        blocked = bs_spectrum(conn, torus4_fibration(1.0), grid_step=0.05)
        self.assertEqual(blocked.regular_levels, ())
        self.assertFalse(blocked.is_continuum)

    def test_second_generator_at_integral_fixed_value(self):
        spectrum = bs_spectrum(torus4_connection(1), torus4_fibration(2 * math.pi), grid_step=0.05)
        np.testing.assert_allclose(spectrum.regular_levels, [0.0], atol=1e-8)


class TestRiemannRoch(BaseTmpl):
    def test_sphere_and_torus(self):
        for k in (1, 2, 5):
            self.assertEqual(riemann_roch_surface(Pq_Symplectic_Form.area(SPHERE_CYL, k), 0), 2 * k + 1)
            self.assertEqual(riemann_roch_surface(Pq_Symplectic_Form.area(TORUS, k / (2 * math.pi)), 1), k)

    def test_contracts(self):
        self.assertRaises(NonIntegralClassError, riemann_roch_surface, Pq_Symplectic_Form.area(SPHERE_CYL, 0.3), 0)
        self.assertRaises(ContractError, riemann_roch_surface, Pq_Symplectic_Form.area(SPHERE_CYL, 1.0), 1)
        self.assertRaises(DomainError, riemann_roch_surface, Pq_Symplectic_Form.standard(DISK), 0)


class TestSpherePotentials(BaseTmpl):
    def test_random_potentials(self):
        potentials = random_sphere_potentials(3, SPHERE_CYL, seed=4)
        pts = SPHERE_CYL.sample(20, self.rng)
        self.assertEqual(len(potentials), 3)
        for psi in potentials:
            self.assertSmall(psi.check_gradient(pts), 1e-6)
        again = random_sphere_potentials(3, SPHERE_CYL, seed=4)
        np.testing.assert_array_equal(potentials[1](pts), again[1](pts))

    def test_trig_potential_vanishes_at_poles(self):
        psi = sphere_trig_potential(np.ones((2, 3, 2)), SPHERE_CYL)
        poles = np.array([[0.3, 1.0], [1.7, -1.0]])
        np.testing.assert_allclose(psi(poles), 0.0, atol=1e-15)
