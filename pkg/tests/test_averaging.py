#!/usr/bin/env python3

import numpy as np

from prequant.pq_exceptions import ChartMismatchError, ContractError, DomainError
from prequant.pq_geometry.pq_charts import DISK, SPHERE_CYL, TORUS
from prequant.pq_geometry.pq_fields import Pq_Scalar_Field, Pq_Smooth_Map
from prequant.pq_geometry.pq_forms import Pq_Differential_Form
from prequant.pq_symplectic.pq_averaging import (
    Pq_Circle_Action,
    average_over_circle,
    average_over_cyclic_group,
    invariance_residual,
    rotation_action,
)

from .base_tmpl import BaseTmpl

Z = Pq_Scalar_Field.coordinate(1, "z")


def cos_mode(m: int) -> Pq_Scalar_Field:
    return Pq_Scalar_Field(
        lambda pts: np.cos(m * pts[:, 0]),
        gradient=lambda pts: np.column_stack([-m * np.sin(m * pts[:, 0]), np.zeros(pts.shape[0])]),
        name=f"cos({m}theta)",
    )


class TestAveraging(BaseTmpl):
    def setUp(self):
        super().setUp()
        self.action = rotation_action(SPHERE_CYL)
        self.pts = SPHERE_CYL.sample(30, self.rng)
        self.elements = np.linspace(0.0, 2 * np.pi, 7, endpoint=False)

    def test_function_average(self):
        f = Z + cos_mode(1) * (1.0 - Z * Z)
        averaged = average_over_circle(self.action, f)
        np.testing.assert_allclose(np.real(averaged(self.pts)), self.pts[:, 1], atol=1e-12)
        self.assertSmall(averaged.check_gradient(self.pts), 1e-6)
        self.assertGreater(invariance_residual(self.action, f, self.pts, self.elements), 0.1)
        self.assertSmall(invariance_residual(self.action, averaged, self.pts, self.elements), 1e-12)

    def test_cyclic_group_keeps_matching_modes(self):
        np.testing.assert_allclose(average_over_cyclic_group(self.action, cos_mode(1), 3)(self.pts), 0.0, atol=1e-12)
        np.testing.assert_allclose(
            average_over_cyclic_group(self.action, cos_mode(3), 3)(self.pts), np.cos(3 * self.pts[:, 0]), atol=1e-12
        )

    def test_form_average(self):
        oscillating = Pq_Differential_Form.basis(SPHERE_CYL, "z", coefficient=cos_mode(2))
        self.assertSmall(average_over_circle(self.action, oscillating).sup_norm(self.pts), 1e-12)
        invariant = Pq_Differential_Form.basis(SPHERE_CYL, "theta", coefficient=Z - 1.0)
        averaged = average_over_circle(self.action, invariant)
        self.assertSmall((averaged - invariant).sup_norm(self.pts), 1e-12)
        self.assertSmall(invariance_residual(self.action, averaged, self.pts, self.elements), 1e-12)

    def test_contracts(self):
        self.assertRaises(ValueError, average_over_circle, self.action, Z, 4)
        self.assertRaises(ValueError, average_over_cyclic_group, self.action, Z, 0)
        self.assertRaises(ChartMismatchError, average_over_circle, self.action, Pq_Differential_Form.top(TORUS, 1.0))
        self.assertRaises(ContractError, rotation_action, SPHERE_CYL, "z")
        self.assertRaises(ValueError, rotation_action, DISK, "theta")

    def test_action_leaving_the_chart(self):
        drift = Pq_Circle_Action(SPHERE_CYL, lambda g: Pq_Smooth_Map.translation(SPHERE_CYL, (0.0, g)), name="z drift")
        self.assertRaises(DomainError, average_over_circle, drift, Z)
        self.assertRaises(DomainError, average_over_cyclic_group, drift, Pq_Differential_Form.basis(SPHERE_CYL, "theta"), 4)
        # the trivial subgroup only applies g = 0
        np.testing.assert_allclose(np.real(average_over_cyclic_group(drift, Z, 1)(self.pts)), self.pts[:, 1])
