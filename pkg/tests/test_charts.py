#!/usr/bin/env python3

import math

import numpy as np

from prequant.pq_exceptions import DomainError
from prequant.pq_geometry.pq_charts import (
    DISK,
    POLE_BAND,
    SPHERE_CYL,
    TORUS,
    TORUS4,
    Pq_Chart,
    disk_chart,
    rectangle_chart,
)

from .base_tmpl import BaseTmpl


class TestCharts(BaseTmpl):
    def test_model_charts(self):
        self.assertEqual(DISK.dim, 2)
        self.assertTrue(DISK.is_star_shaped)
        self.assertFalse(DISK.is_closed_surface)
        self.assertEqual(SPHERE_CYL.coord_names, ("theta", "z"))
        self.assertEqual(SPHERE_CYL.orientation, -1)
        self.assertEqual(SPHERE_CYL.genus, 0)
        self.assertEqual(TORUS.genus, 1)
        self.assertEqual(TORUS.periods, (2 * math.pi, 2 * math.pi))
        self.assertFalse(TORUS.is_star_shaped)
        self.assertEqual(disk_chart(1.0, 4).coord_names, ("x1", "x2", "y1", "y2"))
        self.assertEqual(TORUS4.dim, 4)
        self.assertEqual(TORUS4.periods, (2 * math.pi,) * 4)
        self.assertFalse(TORUS4.is_closed_surface)

    def test_invalid_chart(self):
        self.assertRaises(ValueError, Pq_Chart, "line3", ("a", "b", "c"), ((0, 1),) * 3)
        self.assertRaises(ValueError, Pq_Chart, "empty", ("a",), ((1.0, 1.0),))
        self.assertRaises(ValueError, disk_chart, 1.0, 3)
        self.assertRaises(ValueError, Pq_Chart, "c", ("t",), ((0, 1),), periodic=(True,), exclusion_band=(0.1,))

    def test_contains_pole_band(self):
        inside = SPHERE_CYL.contains([[0.5, 0.0], [7.0, 0.99], [0.0, 1.0 - POLE_BAND / 2]])
        np.testing.assert_array_equal(inside, [True, True, False])
        # the band is only enforced on request
        self.assertTrue(SPHERE_CYL.contains([[0.0, 1.0]], is_check_band=False).all())
        self.assertRaises(DomainError, SPHERE_CYL.validate, [[0.0, 1.0]])

    def test_contains_ball(self):
        np.testing.assert_array_equal(DISK.contains([[0.6, 0.6], [0.7, 0.8]]), [True, False])

    def test_reduce_periodic(self):
        reduced = TORUS.reduce([[2 * math.pi + 0.5, -0.25]])
        np.testing.assert_allclose(reduced, [[0.5, 2 * math.pi - 0.25]])

    def test_sample_is_deterministic_and_inside(self):
        for chart in (DISK, SPHERE_CYL, TORUS, TORUS4, disk_chart(0.5, 4)):
            a = chart.sample(100, np.random.default_rng(3))
            b = chart.sample(100, np.random.default_rng(3))
            np.testing.assert_array_equal(a, b)
            self.assertEqual(a.shape, (100, chart.dim))
            self.assertTrue(chart.contains(a).all())

    def test_equality(self):
        self.assertEqual(disk_chart(), DISK)
        self.assertNotEqual(disk_chart(0.5), DISK)
        self.assertEqual(len({DISK, disk_chart(), TORUS}), 2)

    def test_total_region(self):
        region = SPHERE_CYL.total_region()
        self.assertEqual(region.orientation, -1)
        self.assertRaises(DomainError, DISK.total_region)
        box = rectangle_chart("box", ("x", "y"), ((-1.0, 1.0), (-2.0, 2.0)))
        self.assertEqual(box.total_region().bounds, ((-1.0, 1.0), (-2.0, 2.0)))

    def test_point(self):
        p = SPHERE_CYL.point(0.3, 0.2).validated()
        np.testing.assert_array_equal(p.array, [0.3, 0.2])
        self.assertRaises(DomainError, SPHERE_CYL.point(0.3).validated)
        self.assertRaises(DomainError, SPHERE_CYL.point(0.3, 1.0).validated)
