#!/usr/bin/env python3

import argparse
import logging
import os
import os.path as os_path
import sys

from prequant.pq_about import __title__, __version__
from prequant.pq_envar import DEFAULT_OUTPUT_ROOT, OUTPUT_DIR_ENVAR, get_output_root
from prequant.pq_exceptions import ConfigError, ContractError, NumericalError
from prequant.pq_print import color_print, verdict_print
from prequant.pq_scenarios.pq_report import emit_report
from prequant.pq_scenarios.pq_scenarios import SCENARIOS, get_scenario, run_scenario
from prequant.pq_settings.pq_settings import Pq_Settings
from prequant.pq_utils import Pq_Procedure_Result

EXIT_PASS = 0
EXIT_CHECK_FAILURE = 1
EXIT_CONFIG_ERROR = 2
EXIT_INTERNAL_ERROR = 3


class Pq_Main_Cli:
    def __init__(self) -> None:
        self.cwd = os.getcwd()
        self.args_parser: argparse.ArgumentParser = self.create_args_parser()
        self.options: argparse.Namespace = argparse.Namespace()
        self.settings = Pq_Settings()
        self.exit_code = EXIT_PASS

    def __add_log_levels(self, parser: argparse.ArgumentParser, *, is_subcommand: bool = False) -> None:
        # subcommands must not reset flags given before the command name
        default = argparse.SUPPRESS if is_subcommand else False
        parser.add_argument(
            "--quiet",
            dest="is_quiet",
            action="store_true",
            default=default,
            help="disable all logging except the final error message",
        )
        parser.add_argument(
            "--verbose",
            dest="is_verbose",
            action="store_true",
            default=default,
            help="enable verbose logging",
        )

    def __add_settings_options(self, parser: argparse.ArgumentParser) -> None:
        parser.add_argument(
            "--config",
            metavar="<file>",
            dest="config_file",
            default=None,
            help="Read settings from a file of 'section.key = value' lines.",
        )
        parser.add_argument(
            "--seed",
            metavar="<n>",
            type=int,
            default=None,
            help="Seed for sampled points and randomized sweeps. The default is 0.",
        )
        parser.add_argument(
            "--set",
            metavar="<section.key=value>",
            dest="assignments",
            action="append",
            default=None,
            help="Override one setting, can be given several times. Applied after --config.",
        )
        parser.add_argument(
            "--xlsx",
            dest="is_xlsx",
            action="store_true",
            default=False,
            help="Also write spectra tables to an Excel workbook.",
        )

    def create_args_parser(self) -> argparse.ArgumentParser:
        parser = argparse.ArgumentParser(prog="pqnt", formatter_class=argparse.RawDescriptionHelpFormatter)
        parser.add_argument(
            "--version",
            action="store_true",
            default=False,
            help="show version and exit",
        )
        self.__add_log_levels(parser)
        subparsers: argparse._SubParsersAction = parser.add_subparsers(title="commands", dest="command")
        self.run_parser = self.create_run_parser(subparsers)
        self.list_parser = self.create_list_parser(subparsers)
        self.verify_all_parser = self.create_verify_all_parser(subparsers)
        return parser

    def create_run_parser(self, subparsers: argparse._SubParsersAction) -> argparse.ArgumentParser:
        run_parser = subparsers.add_parser("run", help="run one scenario and write its report")
        run_parser.add_argument("scenario", metavar="<scenario>", help="Scenario name, see the list command.")
        run_parser.add_argument(
            "--out",
            metavar="<dir>",
            dest="odir",
            default=None,
            help="Output directory. The default is <output root>/<scenario>.",
        )
        self.__add_settings_options(run_parser)
        self.__add_log_levels(run_parser, is_subcommand=True)
        run_parser.set_defaults(func=self.parse_settings_args)
        return run_parser

    def create_list_parser(self, subparsers: argparse._SubParsersAction) -> argparse.ArgumentParser:
        list_parser = subparsers.add_parser("list", help="list registered scenarios")
        self.__add_log_levels(list_parser, is_subcommand=True)
        return list_parser

    def create_verify_all_parser(self, subparsers: argparse._SubParsersAction) -> argparse.ArgumentParser:
        verify_all_parser = subparsers.add_parser("verify-all", help="run every scenario into <dir>/<scenario>/")
        verify_all_parser.add_argument(
            "--out",
            metavar="<dir>",
            dest="odir",
            default=None,
            help=f"Output root. The default is ${OUTPUT_DIR_ENVAR} or {DEFAULT_OUTPUT_ROOT}.",
        )
        self.__add_settings_options(verify_all_parser)
        self.__add_log_levels(verify_all_parser, is_subcommand=True)
        verify_all_parser.set_defaults(func=self.parse_settings_args)
        return verify_all_parser

    def parse_settings_args(self, options: argparse.Namespace) -> Pq_Procedure_Result:
        settings = Pq_Settings()
        try:
            if options.command == "run":
                get_scenario(options.scenario)
            if options.config_file is not None:
                if not os_path.isfile(options.config_file):
                    return False, f"no such file as\n\n{options.config_file}"
                logging.debug(f"Using configuration file {options.config_file}")
                settings.load_file(options.config_file)
            if options.seed is not None:
                settings.set_value("run.seed", options.seed, source="--seed")
            settings.load_assignments(options.assignments or [])
        except ConfigError as e:
            return False, str(e)
        self.settings = settings
        return True, None

    def parse_args(self, argv: list[str]) -> Pq_Procedure_Result:
        options = self.args_parser.parse_args(argv[1:])
        self.options = options

        is_quiet = getattr(options, "is_quiet", False)
        is_verbose = getattr(options, "is_verbose", False)
        if is_quiet and is_verbose:
            return False, "logging cannot be quiet and verbose at the same time"
        if is_quiet:
            logging.basicConfig(format="%(message)s", level=logging.CRITICAL)
        elif is_verbose:
            logging.basicConfig(format="%(message)s", level=logging.DEBUG)
        else:
            logging.basicConfig(format="%(message)s", level=logging.INFO)

        if (func := getattr(options, "func", None)) is not None:
            return func(options)
        return True, None

    def check_python(self) -> Pq_Procedure_Result:
        v_info = sys.version_info
        if v_info.minor >= 10 and v_info.major == 3:
            return True, None
        else:
            return (
                False,
                (
                    f"Error: Python {v_info.major}.{v_info.minor} is too old."
                    f" {__title__} only supports Python 3.10 or higher."
                ),
            )

    def run_one(self, name: str, odir: str) -> int:
        """Run a scenario, write its files and return its exit code."""
        try:
            report = run_scenario(self.settings, name)
        except ConfigError as e:
            logging.critical(f"{name}: {e}")
            return EXIT_CONFIG_ERROR
        except (NumericalError, ContractError) as e:
            logging.critical(f"{name}: {type(e).__name__}: {e}")
            return EXIT_INTERNAL_ERROR
        except Exception as e:
            logging.critical(f"{name}: unexpected {type(e).__name__}: {e}", exc_info=getattr(self.options, "is_verbose", False))
            return EXIT_INTERNAL_ERROR

        try:
            emit_report(report, odir, is_xlsx=self.options.is_xlsx)
        except OSError as e:
            logging.critical(f"{name}: {e}")
            return EXIT_CONFIG_ERROR

        failed = report.failed_checks()
        verdict_print(name, report.passed, f"({len(report.checks) - len(failed)}/{len(report.checks)} checks, {report.duration:.2f}s)")
        if not getattr(self.options, "is_quiet", False):
            color_print("OKGREEN", os_path.abspath(odir), prefix="Output was saved to ", postfix=".")
        return EXIT_PASS if report.passed else EXIT_CHECK_FAILURE

    def run_scenario_command(self) -> Pq_Procedure_Result:
        odir = self.options.odir or os_path.join(get_output_root(), self.options.scenario)
        self.exit_code = self.run_one(self.options.scenario, odir)
        if self.exit_code == EXIT_CHECK_FAILURE:
            return False, f"{self.options.scenario} failed"
        return self.exit_code == EXIT_PASS, None

    def run_verify_all(self) -> Pq_Procedure_Result:
        root = self.options.odir or get_output_root()
        codes = {name: self.run_one(name, os_path.join(root, name)) for name in SCENARIOS}
        self.exit_code = max(codes.values(), default=EXIT_PASS)
        if self.exit_code == EXIT_PASS:
            logging.info(f"All {len(codes)} scenarios passed.")
            return True, None
        failed = [name for name, code in codes.items() if code != EXIT_PASS]
        return False, f"{len(failed)} of {len(codes)} scenarios did not pass: {', '.join(failed)}"

    def list_scenarios(self) -> Pq_Procedure_Result:
        for scenario in SCENARIOS.values():
            print(f"{scenario.name}: {scenario.description}")
        return True, None

    def run(self) -> Pq_Procedure_Result:
        success, err_msg = self.check_python()
        if not success:
            self.exit_code = EXIT_CONFIG_ERROR
            return success, err_msg
        if self.options.version:
            return self.show_version()
        elif self.options.command == "list":
            return self.list_scenarios()
        elif self.options.command == "run":
            return self.run_scenario_command()
        elif self.options.command == "verify-all":
            return self.run_verify_all()
        else:
            self.args_parser.print_help()
            return True, None

    def show_version(self) -> Pq_Procedure_Result:
        print(__version__)
        return True, None


def main_cli() -> None:
    ui = Pq_Main_Cli()
    success, err_msg = ui.parse_args(sys.argv)
    if not success:
        logging.critical(err_msg)
        sys.exit(EXIT_CONFIG_ERROR)
    success, err_msg = ui.run()
    if not success:
        if err_msg:
            logging.critical(err_msg)
        sys.exit(ui.exit_code)


if __name__ == "__main__":
    main_cli()
