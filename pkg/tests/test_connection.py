#!/usr/bin/env python3

import cmath
import math

import numpy as np

from prequant.pq_bundle.pq_connection import (
    Pq_Prequantum_Connection,
    disk_from_form,
    disk_standard,
    flat_connection,
    holonomy,
    pullback_connection,
    same_holonomy_representation,
    sphere_monopole,
    torus4_connection,
    torus_connection,
)
from prequant.pq_exceptions import (
    ChartMismatchError,
    ContractError,
    CurvatureMismatchError,
    HermitianViolationError,
    NonIntegralClassError,
    OpenPathError,
    PoleDecayError,
    RegionScheduleError,
    UnknownRegionError,
)
from prequant.pq_geometry.pq_charts import DISK, SPHERE_CYL, TORUS, TORUS4
from prequant.pq_geometry.pq_fields import Pq_Scalar_Field, Pq_Smooth_Map
from prequant.pq_geometry.pq_forms import Pq_Differential_Form
from prequant.pq_geometry.pq_paths import Pq_Path
from prequant.pq_symplectic.pq_linear import Pq_Symplectic_Form

from .base_tmpl import BaseTmpl

Z = Pq_Scalar_Field.coordinate(1, "z")


def theta_form(coefficient: Pq_Scalar_Field) -> Pq_Differential_Form:
    return Pq_Differential_Form.one_form(SPHERE_CYL, [coefficient, None])


class TestMonopole(BaseTmpl):
    def test_latitude_holonomy(self):
        for k in (1, 2, 3):
            conn = sphere_monopole(k)
            for z in (-0.6, 0.0, 0.45):
                expected = cmath.exp(2j * math.pi * k * z)
                self.assertAlmostEqual(holonomy(conn, Pq_Path.latitude(z, region="N")), expected, places=10)
                self.assertAlmostEqual(holonomy(conn, Pq_Path.latitude(z, region="S")), expected, places=10)

    def test_region_switch_mid_loop(self):
        conn = sphere_monopole(2)
        loop = Pq_Path.latitude(0.3).with_schedule([(0.0, 0.5, "N"), (0.5, 1.0, "S")])
        self.assertAlmostEqual(holonomy(conn, loop), cmath.exp(2j * math.pi * 2 * 0.3), places=10)

    def test_schedule_errors(self):
        conn = sphere_monopole(1)
        self.assertRaises(RegionScheduleError, holonomy, conn, Pq_Path.latitude(0.3))
        self.assertRaises(UnknownRegionError, holonomy, conn, Pq_Path.latitude(0.3, region="E"))
        self.assertRaises(UnknownRegionError, conn.potential, "E")
        segment = Pq_Path.segment(SPHERE_CYL, (0.0, 0.0), (1.0, 0.5))
        self.assertRaises(OpenPathError, holonomy, conn, segment.with_schedule([(0.0, 1.0, "N")]))
        self.assertRaises(ChartMismatchError, holonomy, conn, Pq_Path.circle(DISK, (0.0, 0.0), 0.5))

    def test_construction_contracts(self):
        area = Pq_Symplectic_Form.area(SPHERE_CYL, 1.0)
        north = theta_form(Z - 1.0)
        south = theta_form(Z + 1.0)
        self.assertRaises(ContractError, Pq_Prequantum_Connection, area, {})
        self.assertRaises(CurvatureMismatchError, Pq_Prequantum_Connection, Pq_Symplectic_Form.area(SPHERE_CYL, 2.0), {"N": north})
        self.assertRaises(HermitianViolationError, Pq_Prequantum_Connection, area, {"N": north.scale(1j)})
        self.assertRaises(PoleDecayError, Pq_Prequantum_Connection, area, {"N": south}, poles={"N": 1.0})
        self.assertRaises(UnknownRegionError, Pq_Prequantum_Connection, area, {"N": north}, transitions={("N", "S"): lambda pts: pts[:, 0]})
        wrong = {("N", "S"): lambda pts: 3 * pts[:, 0], ("S", "N"): lambda pts: -3 * pts[:, 0]}
        self.assertRaises(ContractError, Pq_Prequantum_Connection, area, {"N": north, "S": south}, transitions=wrong)

    def test_non_integral_class(self):
        area = Pq_Symplectic_Form.area(SPHERE_CYL, 0.3)
        with self.assertRaises(NonIntegralClassError):
            Pq_Prequantum_Connection(area, {"N": theta_form((Z - 1.0).scale(0.3))})
        conn = Pq_Prequantum_Connection(area, {"N": theta_form((Z - 1.0).scale(0.3))}, is_check_integrality=False)
        self.assertEqual(conn.default_region, "N")

    def test_pullback_by_rotation(self):
        conn = sphere_monopole(2)
        rotation = Pq_Smooth_Map.translation(SPHERE_CYL, (0.7, 0.0))
        pulled = pullback_connection(rotation, conn)
        loops = [Pq_Path.latitude(z, region="N") for z in (-0.2, 0.5)]
        self.assertTrue(same_holonomy_representation(conn, pulled, loops))
        self.assertIs(pullback_connection(Pq_Smooth_Map.identity(SPHERE_CYL), conn), conn)
        self.assertRaises(ChartMismatchError, pullback_connection, Pq_Smooth_Map.identity(TORUS), conn)


class TestTorusAndDisk(BaseTmpl):
    def test_torus_holonomy(self):
        conn = torus_connection(1, 0.25)
        first = Pq_Path.coordinate_circle(TORUS, 0, (0.0, 0.0))
        second = Pq_Path.coordinate_circle(TORUS, 1, (1.0, 0.0))
        self.assertAlmostEqual(holonomy(conn, first), 1j, places=10)
        self.assertAlmostEqual(holonomy(conn, second), cmath.exp(1j), places=10)

    def test_torus_closed_shift_changes_holonomy(self):
        conn = torus_connection(1)
        shifted = conn.shifted(Pq_Differential_Form.one_form(TORUS, [0.25, None], name="0.25dtheta1"))
        first = Pq_Path.coordinate_circle(TORUS, 0, (0.0, 0.0))
        self.assertFalse(same_holonomy_representation(conn, shifted, [first]))
        self.assertRaises(RegionScheduleError, pullback_connection, Pq_Smooth_Map.translation(TORUS, (0.1, 0.0)), conn)

    def test_product_torus_holonomy(self):
        conn = torus4_connection(1)
        self.assertEqual(sorted(cut.axis for cut in conn.cuts), [0, 2])
        theta1 = Pq_Path.coordinate_circle(TORUS4, 0, (0.0, 1.0, 0.0, 0.0))
        theta3 = Pq_Path.coordinate_circle(TORUS4, 2, (0.0, 0.0, 0.0, 2.0))
        theta2 = Pq_Path.coordinate_circle(TORUS4, 1, (1.0, 0.0, 0.0, 0.0))
        self.assertAlmostEqual(holonomy(conn, theta1), cmath.exp(-1j), places=10)
        self.assertAlmostEqual(holonomy(conn, theta3), cmath.exp(-2j), places=10)
        self.assertAlmostEqual(holonomy(conn, theta2), cmath.exp(1j), places=10)
        self.assertRaises(ContractError, torus4_connection, 0)
        self.assertRaises(
            ContractError, Pq_Prequantum_Connection, conn.base, conn.potentials, cuts=conn.cuts + conn.cuts[:1]
        )

    def test_flat_connection(self):
        conn = torus_connection(0, 0.5)
        self.assertTrue(conn.base.is_degenerate)
        self.assertAlmostEqual(holonomy(conn, Pq_Path.coordinate_circle(TORUS, 0, (0.0, 0.0))), -1.0, places=10)
        self.assertAlmostEqual(holonomy(flat_connection(DISK), Pq_Path.circle(DISK, (0.0, 0.0), 0.5)), 1.0, places=12)

    def test_disk_holonomy_is_enclosed_area(self):
        loop = Pq_Path.circle(DISK, (0.0, 0.0), 0.5)
        self.assertAlmostEqual(holonomy(disk_standard(), loop), cmath.exp(1j * math.pi / 4), places=10)
        x = Pq_Scalar_Field.coordinate(0)
        omega = Pq_Symplectic_Form(Pq_Differential_Form.top(DISK, 1.0 + 0.2 * x, name="(1+0.2x)dx^dy"))
        small = Pq_Path.circle(DISK, (0.0, 0.0), 0.3)
        self.assertAlmostEqual(holonomy(disk_from_form(omega), small), cmath.exp(1j * math.pi * 0.09), places=10)

    def test_gauge_shift_keeps_holonomy(self):
        conn = disk_standard()
        psi = Pq_Scalar_Field(
            lambda pts: np.sin(pts[:, 0]) * pts[:, 1],
            gradient=lambda pts: np.column_stack([np.cos(pts[:, 0]) * pts[:, 1], np.sin(pts[:, 0])]),
            name="psi",
        )
        exact = Pq_Differential_Form.one_form(DISK, [Pq_Scalar_Field(lambda pts, i=i: psi.gradient(pts)[:, i], name=f"dpsi{i}") for i in range(2)])
        loops = [Pq_Path.circle(DISK, (0.1, 0.0), 0.4), Pq_Path.rectangle(DISK, (-0.3, 0.2), (-0.4, 0.1))]
        self.assertTrue(same_holonomy_representation(conn, conn.shifted(exact), loops))
