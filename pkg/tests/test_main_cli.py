#!/usr/bin/env python3

import os
import os.path as os_path
from unittest import mock

from prequant.pq_about import __version__
from prequant.pq_main_cli import EXIT_CHECK_FAILURE, EXIT_CONFIG_ERROR, EXIT_PASS, Pq_Main_Cli
from prequant.pq_scenarios.pq_report import REPORT_NAME, Pq_Report

from .base_tmpl import BaseTmpl


class TestMain(BaseTmpl):
    cli = Pq_Main_Cli()

    @mock.patch("sys.version_info")
    def test_check_python(self, mock_version_info):
        mock_version_info.major, mock_version_info.minor = (3, 7)
        sucess, _ = self.cli.check_python()
        self.assertFalse(sucess)

    def test_show_version(self) -> None:
        with mock.patch("builtins.print") as mock_print:
            self.assertTrue(self.cli.show_version()[0])
        mock_print.assert_called_once_with(__version__)

    def test_list(self):
        ui = Pq_Main_Cli()
        self.assertEqual(ui.parse_args(["pqnt", "list"]), (True, None))
        with mock.patch("builtins.print") as mock_print:
            self.assertTrue(ui.run()[0])
        printed = [call.args[0] for call in mock_print.call_args_list]
        self.assertTrue(any(line.startswith("riemann-roch: ") for line in printed))
        self.assertEqual(len(printed), 9)


class TestParseArgs(BaseTmpl):
    def setUp(self):
        super().setUp()
        self.ui = Pq_Main_Cli()

    def test_run_settings(self):
        success, err_msg = self.ui.parse_args(
            ["pqnt", "run", "bs-sphere", "--seed", "5", "--set", "bs.k_values=1,2", "--set", "bs.grid_step=0.02"]
        )
        self.assertTrue(success, err_msg)
        self.assertEqual(self.ui.options.scenario, "bs-sphere")
        self.assertIsNone(self.ui.options.odir)
        self.assertFalse(self.ui.options.is_xlsx)
        self.assertEqual(self.ui.settings["run.seed"], 5)
        self.assertEqual(self.ui.settings["bs.k_values"], (1, 2))
        self.assertEqual(self.ui.settings["bs.grid_step"], 0.02)

    def test_config_then_set(self):
        tmpdir = self.make_tmpdir()
        config_file = os_path.join(tmpdir, "run.conf")
        with open(config_file, "w", encoding="utf-8") as f:
            f.write("gauge.k = 2\ngauge.amplitude = 0.5\n")
        success, _ = self.ui.parse_args(["pqnt", "run", "gauge-necessity", "--config", config_file, "--set", "gauge.k=3"])
        self.assertTrue(success)
        self.assertEqual(self.ui.settings["gauge.k"], 3)
        self.assertEqual(self.ui.settings["gauge.amplitude"], 0.5)

    def test_bad_arguments(self):
        success, err_msg = self.ui.parse_args(["pqnt", "run", "no-such-scenario"])
        self.assertFalse(success)
        self.assertIn("unknown scenario", err_msg)
        success, err_msg = self.ui.parse_args(["pqnt", "run", "bs-sphere", "--set", "bs.grid=0.1"])
        self.assertFalse(success)
        self.assertIn("bs.grid", err_msg)
        success, err_msg = self.ui.parse_args(["pqnt", "run", "bs-sphere", "--set", "tolerance.level=-1"])
        self.assertFalse(success)
        success, err_msg = self.ui.parse_args(["pqnt", "run", "bs-sphere", "--config", "missing.conf"])
        self.assertFalse(success)
        self.assertIn("missing.conf", err_msg)

    def test_quiet_and_verbose(self):
        success, err_msg = self.ui.parse_args(["pqnt", "--quiet", "list", "--verbose"])
        self.assertFalse(success)
        self.assertIn("quiet and verbose", err_msg)

    def test_subcommand_keeps_global_flags(self):
        self.assertTrue(self.ui.parse_args(["pqnt", "--verbose", "list"])[0])
        self.assertTrue(self.ui.options.is_verbose)


class TestRun(BaseTmpl):
    def test_run_writes_report(self):
        tmpdir = self.make_tmpdir()
        odir = os_path.join(tmpdir, "rr")
        ui = Pq_Main_Cli()
        self.assertTrue(ui.parse_args(["pqnt", "--quiet", "run", "riemann-roch", "--out", odir, "--set", "riemann_roch.k_values=1,2"])[0])
        self.assertEqual(ui.run(), (True, None))
        self.assertEqual(ui.exit_code, EXIT_PASS)
        report = Pq_Report.load(os_path.join(odir, REPORT_NAME))
        self.assertTrue(report.passed)
        self.assertEqual(report.parameters["riemann_roch.k_values"], "1,2")

    def test_default_output_directory(self):
        tmpdir = self.make_tmpdir()
        ui = Pq_Main_Cli()
        with mock.patch.dict(os.environ, {"PREQUANT_OUTPUT_DIR": tmpdir}):
            ui.parse_args(["pqnt", "--quiet", "run", "riemann-roch"])
            ui.run()
        self.assertFileExists(os_path.join(tmpdir, "riemann-roch", REPORT_NAME))

    def test_failed_checks_set_exit_code(self):
        tmpdir = self.make_tmpdir()
        failing = Pq_Report("riemann-roch")
        failing.add_check("forced", 1.0, 0.5)
        ui = Pq_Main_Cli()
        ui.parse_args(["pqnt", "--quiet", "run", "riemann-roch", "--out", tmpdir])
        with mock.patch("prequant.pq_main_cli.run_scenario", return_value=failing):
            success, err_msg = ui.run()
        self.assertFalse(success)
        self.assertIn("failed", err_msg)
        self.assertEqual(ui.exit_code, EXIT_CHECK_FAILURE)

    def test_unwritable_output(self):
        tmpdir = self.make_tmpdir()
        blocker = os_path.join(tmpdir, "file")
        with open(blocker, "w", encoding="utf-8") as f:
            f.write("")
        ui = Pq_Main_Cli()
        ui.parse_args(["pqnt", "--quiet", "run", "riemann-roch", "--out", os_path.join(blocker, "out")])
        self.assertFalse(ui.run()[0])
        self.assertEqual(ui.exit_code, EXIT_CONFIG_ERROR)
