#!/usr/bin/env python3

import numpy as np

from prequant.pq_exceptions import ChartMismatchError, CohomologyObstructionError, DegenerateFormError, ShrinkRadiusError
from prequant.pq_geometry.pq_charts import DISK, SPHERE_CYL, TORUS
from prequant.pq_geometry.pq_fields import Pq_Scalar_Field
from prequant.pq_geometry.pq_forms import Pq_Differential_Form, pullback_form
from prequant.pq_symplectic.pq_linear import Pq_Symplectic_Form
from prequant.pq_symplectic.pq_moser import (
    Pq_Moser_Path,
    convergence_verdict,
    darboux_chart,
    flow_convergence,
    invertibility_residual,
    moser_flow,
    moser_vector_field,
    primitive_for_path,
    pullback_residual,
)

from .base_tmpl import BaseTmpl


def height_density_form(eps: float) -> Pq_Symplectic_Form:
    z = Pq_Scalar_Field.coordinate(1, "z")
    density = (1.0 + z.scale(eps)).scale(SPHERE_CYL.orientation)
    return Pq_Symplectic_Form(Pq_Differential_Form.top(SPHERE_CYL, density, name=f"(1+{eps}z)*area"))


def legendre_density_form(eps: float) -> Pq_Symplectic_Form:
    z = Pq_Scalar_Field.coordinate(1, "z")
    density = (1.0 + (z * z).scale(1.5 * eps) - 0.5 * eps).scale(SPHERE_CYL.orientation)
    return Pq_Symplectic_Form(Pq_Differential_Form.top(SPHERE_CYL, density, name=f"(1+{eps}(3z^2-1)/2)*area"))


class TestMoserPath(BaseTmpl):
    def test_contracts(self):
        area = Pq_Symplectic_Form.area(SPHERE_CYL)
        self.assertRaises(DegenerateFormError, Pq_Moser_Path, area, area.scale(-1.0))
        self.assertRaises(CohomologyObstructionError, Pq_Moser_Path, area, area.scale(2.0))
        self.assertRaises(ChartMismatchError, Pq_Moser_Path, area, Pq_Symplectic_Form.area(TORUS))

    def test_interpolation(self):
        path = Pq_Moser_Path(Pq_Symplectic_Form.area(SPHERE_CYL), height_density_form(0.4))
        pts = SPHERE_CYL.sample(10, self.rng)
        np.testing.assert_allclose(path.matrix(0.5, pts)[:, 0, 1], -(1.0 + 0.2 * pts[:, 1]))
        np.testing.assert_allclose(np.real(path.omega_t(0.5).matrix(pts)), path.matrix(0.5, pts))

    def test_vector_field_solves_contraction(self):
        path = Pq_Moser_Path(Pq_Symplectic_Form.area(SPHERE_CYL), height_density_form(0.4))
        alpha = primitive_for_path(path)
        pts = SPHERE_CYL.sample(20, self.rng)
        t = 0.3
        vec = moser_vector_field(path, alpha, t, pts)
        # T X = alpha for the coefficient matrix T of omega_t
        np.testing.assert_allclose(np.einsum("nij,nj->ni", path.matrix(t, pts), vec), np.real(alpha.form.components(pts)), atol=1e-12)
        # rotation invariant data gives no theta motion
        self.assertSmall(float(np.max(np.abs(vec[:, 0]))), 1e-12)
        single = moser_vector_field(path, alpha, t, SPHERE_CYL.point(0.3, 0.2))
        self.assertEqual(single.shape, (2,))


class TestMoserFlow(BaseTmpl):
    def setUp(self):
        super().setUp()
        self.omega0 = Pq_Symplectic_Form.area(SPHERE_CYL)
        self.omega1 = height_density_form(0.3)
        self.path = Pq_Moser_Path(self.omega0, self.omega1)
        self.alpha = primitive_for_path(self.path)
        self.pts = SPHERE_CYL.sample(30, self.rng)

    def test_pullback_equals_target(self):
        flow = moser_flow(self.path, self.alpha, 100)
        self.assertSmall(pullback_residual(flow, self.omega0, self.omega1, self.pts), 1e-6)
        self.assertSmall(invertibility_residual(self.path, self.alpha, 100, self.pts), 1e-8)

    def test_flow_is_cached_and_copied(self):
        flow = moser_flow(self.path, self.alpha, 20)
        first = flow(self.pts)
        first[:] = 0.0
        np.testing.assert_array_equal(flow(self.pts), flow(self.pts))
        self.assertFalse(np.all(flow(self.pts) == 0.0))

    def test_zero_primitive_gives_identity(self):
        area = Pq_Symplectic_Form.area(SPHERE_CYL)
        path = Pq_Moser_Path(area, area)
        flow = moser_flow(path, Pq_Differential_Form.zero(SPHERE_CYL, 1), 10)
        np.testing.assert_array_equal(flow(self.pts), self.pts)
        self.assertRaises(ValueError, moser_flow, path, Pq_Differential_Form.zero(SPHERE_CYL, 1), 0)

    def test_convergence(self):
        # few steps keep the RK4 error well above the finite-difference floor
        result = flow_convergence(self.path, self.alpha, (1, 2, 4), samples=20)
        self.assertEqual(result.steps, (1, 2, 4))
        self.assertEqual(len(result.ratios), 2)
        self.assertTrue(result.is_converging)
        self.assertFalse(result.is_at_floor)
        for ratio in result.ratios:
            self.assertGreaterEqual(ratio, 4.0)

    def test_convergence_verdict(self):
        ratios, is_converging, is_at_floor = convergence_verdict((1e-4, 6e-6, 4e-7))
        self.assertTrue(is_converging)
        self.assertFalse(is_at_floor)
        self.assertAlmostEqual(ratios[0], 1e-4 / 6e-6)
        # growing residuals never converge, whether above the floor or below it
        self.assertEqual(convergence_verdict((2e-8, 3e-8, 5e-8))[1:], (False, False))
        self.assertEqual(convergence_verdict((5.5e-11, 8.4e-11, 1.5e-10))[1:], (False, True))
        self.assertEqual(convergence_verdict((1e-6, 2e-6), floor=1e-5)[1:], (False, True))
        self.assertEqual(convergence_verdict((1e-8, 0.0))[0], (np.inf,))
        self.assertRaises(ValueError, convergence_verdict, (1e-3,))


class TestLegendreMoser(BaseTmpl):
    def test_pullback_at_200_steps(self):
        omega0 = Pq_Symplectic_Form.area(SPHERE_CYL)
        omega1 = legendre_density_form(0.2)
        path = Pq_Moser_Path(omega0, omega1)
        alpha = primitive_for_path(path)
        self.assertSmall(alpha.residual, 1e-6)
        flow = moser_flow(path, alpha, 200)
        pts = SPHERE_CYL.sample(30, self.rng)
        self.assertSmall(pullback_residual(flow, omega0, omega1, pts), 1e-3)
        self.assertSmall(float(np.max(np.abs(flow(pts)[:, 0] - pts[:, 0]))), 1e-10)


class TestDarbouxChart(BaseTmpl):
    def setUp(self):
        super().setUp()
        x = Pq_Scalar_Field.coordinate(0)
        self.omega = Pq_Symplectic_Form(Pq_Differential_Form.top(DISK, 1.0 + 0.2 * x, name="(1+0.2x)dx^dy"))

    def test_pullback_is_standard(self):
        psi = darboux_chart(self.omega, (0.1, 0.0), 0.2, steps=60, samples=40)
        pts = psi.source.sample(20, self.rng)
        pulled = pullback_form(psi, self.omega.form)
        standard = Pq_Differential_Form.standard_symplectic(psi.source)
        self.assertSmall((pulled - standard).sup_norm(pts), 1e-6)
        np.testing.assert_allclose(psi(np.zeros((1, 2))), [[0.1, 0.0]], atol=1e-12)

    def test_radius_too_large(self):
        with self.assertRaises(ShrinkRadiusError):
            darboux_chart(self.omega, (0.1, 0.0), 1.5, steps=10, samples=20)

    def test_unit_slope_at_origin(self):
        x = Pq_Scalar_Field.coordinate(0)
        omega = Pq_Symplectic_Form(Pq_Differential_Form.top(DISK, 1.0 + x, name="(1+x)dx^dy"))
        psi = darboux_chart(omega, (0.0, 0.0), 0.3)
        self.assertAlmostEqual(psi.source.ball_radius, 0.3)
        pts = psi.source.sample(30, self.rng)
        residual = (pullback_form(psi, omega.form) - Pq_Differential_Form.standard_symplectic(psi.source)).sup_norm(pts)
        self.assertSmall(residual, 1e-3)
        np.testing.assert_allclose(psi(np.zeros((1, 2))), [[0.0, 0.0]], atol=1e-12)
