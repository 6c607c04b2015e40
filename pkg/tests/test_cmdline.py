import os.path as os_path

from prequant.pq_about import __version__
from prequant.pq_scenarios.pq_report import REPORT_NAME, Pq_Report

from .cmdline_tmpl import CmdlineTmpl


class TestCommandLine(CmdlineTmpl):
    def test_no_command(self):
        result = self.template([], expected_output_file=None)
        result_stdout = result.stdout.decode("utf8")
        self.assertIn("help", result_stdout)
        #  Check for a few more arguments to ensure we hit the intended argumentParser
        self.assertIn("commands:", result_stdout)
        self.assertIn("verify-all", result_stdout)

    def test_help(self):
        """Test that both options print the same help page"""
        result_h = self.template(["-h"], expected_output_file=None)
        result_help = self.template(["--help"], expected_output_file=None)
        self.assertEqual(result_h.stdout.decode("utf-8"), result_help.stdout.decode("utf-8"))

        for subcommand in ("run", "list", "verify-all"):
            result_h = self.template([subcommand, "-h"], expected_output_file=None)
            result_help = self.template([subcommand, "--help"], expected_output_file=None)
            self.assertEqual(result_h.stdout.decode("utf-8"), result_help.stdout.decode("utf-8"))

    def test_version(self):
        self.template(["--version"], expected_stdout=rf"^{__version__}\s*$")

    def test_list(self):
        self.template(["list"], expected_stdout=r"darboux-local: .*\n(.*\n)*calculus-suite: ")

    def test_config_errors(self):
        self.template(["run", "no-such-scenario"], returncode=2, expected_stderr="unknown scenario")
        self.template(["run", "riemann-roch", "--set", "riemann_roch.k_values=x"], returncode=2)
        self.template(["run", "riemann-roch", "--seed", "one"], returncode=2)
        self.template(["--quiet", "list", "--verbose"], returncode=2)

    def test_run(self):
        odir = os_path.join(self.make_tmpdir(), "rr")
        report_file = os_path.join(odir, REPORT_NAME)
        self.template(
            ["run", "riemann-roch", "--out", odir, "--xlsx"],
            expected_output_file=report_file,
            expected_stderr="riemann-roch: .*PASS",
        )
        report = Pq_Report.load(report_file)
        self.assertTrue(report.passed)
        self.assertEqual(report.scenario, "riemann-roch")
        # the riemann-roch scenario records no spectra, so no workbook is written
        self.assertFileNotExist(os_path.join(odir, "spectra.xlsx"))
