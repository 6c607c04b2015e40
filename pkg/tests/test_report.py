#!/usr/bin/env python3

import math
import os.path as os_path

import numpy as np

from prequant.pq_bundle.pq_connection import sphere_monopole
from prequant.pq_io import Pq_IO
from prequant.pq_quantization.pq_bohr_sommerfeld import bs_spectrum
from prequant.pq_quantization.pq_fibration import sphere_height_fibration
from prequant.pq_scenarios.pq_report import REPORT_NAME, Pq_Check, Pq_Report, emit_report

from .base_tmpl import BaseTmpl


class TestCheck(BaseTmpl):
    def test_relations(self):
        self.assertTrue(Pq_Check.measure("small", 1e-9, 1e-8).passed)
        self.assertFalse(Pq_Check.measure("small", 1e-7, 1e-8).passed)
        self.assertTrue(Pq_Check.measure("ratio", 3.9, 3.5, ">=").passed)
        self.assertTrue(Pq_Check.measure("count", 3, 3, "==").passed)
        self.assertFalse(Pq_Check.measure("nan", math.nan, 1.0).passed)
        self.assertRaises(ValueError, Pq_Check.measure, "bad", 1.0, 1.0, "<")

    def test_outcome(self):
        self.assertTrue(Pq_Check.outcome("raised", True).passed)
        self.assertFalse(Pq_Check.outcome("raised", False).passed)
        self.assertTrue(Pq_Check.outcome("not_raised", False, is_expected=False).passed)


class TestReport(BaseTmpl):
    def make_report(self) -> Pq_Report:
        report = Pq_Report("bs-sphere", seed=3, parameters={"bs.grid_step": "0.01"})
        report.add_check("level_count", 3, 3, "==")
        report.add_outcome("singular_rejected", True)
        report.add_spectrum("sphere_k1", bs_spectrum(sphere_monopole(1), sphere_height_fibration()))
        report.add_plot("convergence", [10, 20], [1e-3, 2.5e-4], "steps residual")
        report.duration = 0.5
        return report

    def test_pass_and_fail(self):
        self.assertTrue(Pq_Report("empty").passed)
        report = self.make_report()
        self.assertTrue(report.passed)
        report.add_check("pullback", 0.1, 1e-3)
        self.assertFalse(report.passed)
        self.assertEqual([check.name for check in report.failed_checks()], ["pullback"])

    def test_config_round_trip(self):
        report = self.make_report()
        config = report.to_config()
        self.assertEqual(config["report"]["passed"], "True")
        self.assertIn("sphere_monopole", config["conventions"])
        self.assertIn("int dtheta^dz = -4pi", config["conventions"]["orientation"])
        restored = Pq_Report.from_config(config)
        self.assertEqual(restored, report)
        self.assertEqual(restored.plots, [])

    def test_spectrum_table(self):
        table = self.make_report().spectra[0]
        self.assertEqual(table.connection, sphere_monopole(1).name)
        self.assertEqual(table.singular_levels, (-1.0, 1.0))
        rows = table.rows()
        np.testing.assert_allclose([row[0] for row in rows], [-1.0, 0.0, 1.0], atol=1e-8)
        self.assertTrue(math.isnan(rows[-1][1]))

    def test_emit_report(self):
        tmpdir = self.make_tmpdir()
        odir = os_path.join(tmpdir, "bs-sphere")
        written = emit_report(self.make_report(), odir, is_xlsx=True)
        names = [path.name for path in written]
        self.assertEqual(names, [REPORT_NAME, "spectrum_sphere_k1.csv", "convergence.dat", "spectra.xlsx"])
        for path in written:
            self.assertFileExists(path)
        loaded = Pq_Report.load(os_path.join(odir, REPORT_NAME))
        self.assertEqual(loaded.scenario, "bs-sphere")
        self.assertEqual(loaded.seed, 3)
        header, rows = Pq_IO.load_csv(os_path.join(odir, "spectrum_sphere_k1.csv"))
        self.assertEqual(header[0], "level")
        self.assertEqual(len(rows), 3)

    def test_emit_report_without_extras(self):
        tmpdir = self.make_tmpdir()
        written = emit_report(Pq_Report("riemann-roch"), tmpdir)
        self.assertEqual([path.name for path in written], [REPORT_NAME])
        self.assertFileNotExist(os_path.join(tmpdir, "spectra.xlsx"))

    def test_emit_report_unwritable(self):
        tmpdir = self.make_tmpdir()
        blocker = os_path.join(tmpdir, "file")
        Pq_IO.dump_text("", blocker)
        self.assertRaises(OSError, emit_report, Pq_Report("riemann-roch"), os_path.join(blocker, "out"))
