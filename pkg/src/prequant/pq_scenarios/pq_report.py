#!/usr/bin/env python3

import configparser
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

from prequant.pq_io import Pq_IO, new_config
from prequant.pq_quantization.pq_bohr_sommerfeld import Pq_BS_Spectrum

RELATIONS = ("<=", ">=", "==")

CONVENTIONS = {
    "orientation": (
        "sphere_cyl: dz^dtheta positive (coordinate order theta,z has orientation -1), so over the whole sphere"
        " int dz^dtheta = 4pi and int dtheta^dz = -4pi, while a coordinate-order region gives int dtheta^dz = 4pi;"
        " torus, torus4 and disk: coordinate order"
    ),
    "moser_sign": "iota_{X_t} omega_t = -alpha with d alpha = omega1 - omega0, flow Phi_1^* omega1 = omega0",
    "connection_form": "nabla = d - i alpha, curvature d alpha = omega",
    "holonomy": "hol(gamma) = exp(i * loop integral of alpha)",
    "gauge": "xi = alpha_b - alpha_a, phi = i * int xi, alpha -> alpha - i d phi",
    "sphere_monopole": "alpha_N = k(z-1)dtheta, alpha_S = k(z+1)dtheta, N->S phase 2k theta",
    "torus_cut": "crossing theta1 = 0 forward multiplies by exp(-i k theta2), on torus4 also theta3 = 0 by exp(-i k theta4)",
}


class Pq_Check(NamedTuple):
    name: str
    residual: float
    tolerance: float
    relation: str
    passed: bool

    @classmethod
    def measure(cls, name: str, residual: float, tolerance: float, relation: str = "<=") -> "Pq_Check":
        if relation not in RELATIONS:
            raise ValueError(f"unknown relation {relation!r}, expected one of {RELATIONS}")
        residual, tolerance = float(residual), float(tolerance)
        if relation == "<=":
            passed = residual <= tolerance
        elif relation == ">=":
            passed = residual >= tolerance
        else:
            passed = residual == tolerance
        return cls(name, residual, tolerance, relation, bool(passed))

    @classmethod
    def outcome(cls, name: str, is_observed: bool, is_expected: bool = True) -> "Pq_Check":
        """An event (an error raised, a spectrum changed) compared with its expected occurrence."""
        return cls.measure(name, 1.0 if is_observed else 0.0, 1.0 if is_expected else 0.0, "==")


class Pq_Spectrum_Table(NamedTuple):
    name: str
    connection: str
    levels: tuple[float, ...]
    holonomy_re: tuple[float, ...]
    holonomy_im: tuple[float, ...]
    residuals: tuple[float, ...]
    singular_levels: tuple[float, ...]
    is_continuum: bool

    @classmethod
    def from_spectrum(cls, name: str, spectrum: Pq_BS_Spectrum) -> "Pq_Spectrum_Table":
        return cls(
            name,
            spectrum.connection,
            tuple(float(b) for b in spectrum.regular_levels),
            tuple(float(h.real) for h in spectrum.holonomies),
            tuple(float(h.imag) for h in spectrum.holonomies),
            tuple(float(r) for r in spectrum.residuals),
            tuple(float(s) for s in spectrum.singular_levels),
            spectrum.is_continuum,
        )

    def rows(self) -> list[tuple[float, float, float, float]]:
        """CSV rows sorted by level, singular levels with nan holonomy."""
        rows = list(zip(self.levels, self.holonomy_re, self.holonomy_im, self.residuals))
        rows.extend((s, math.nan, math.nan, math.nan) for s in self.singular_levels)
        return sorted(rows, key=lambda row: row[0])


class Pq_Plot_Data(NamedTuple):
    name: str
    xs: tuple[float, ...]
    ys: tuple[float, ...]
    comment: str = ""


@dataclass
class Pq_Report:
    scenario: str
    seed: int = 0
    parameters: dict[str, str] = field(default_factory=dict)
    conventions: dict[str, str] = field(default_factory=lambda: dict(CONVENTIONS))
    checks: list[Pq_Check] = field(default_factory=list)
    spectra: list[Pq_Spectrum_Table] = field(default_factory=list)
    duration: float = 0.0
    # plot data goes to its own files, not into the report tree
    plots: list[Pq_Plot_Data] = field(default_factory=list, compare=False)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def add_check(self, name: str, residual: float, tolerance: float, relation: str = "<=") -> Pq_Check:
        check = Pq_Check.measure(name, residual, tolerance, relation)
        self.checks.append(check)
        logging.debug(f"{self.scenario}: {check.name} {check.residual!r} {relation} {check.tolerance!r} -> {check.passed}")
        return check

    def add_outcome(self, name: str, is_observed: bool, is_expected: bool = True) -> Pq_Check:
        check = Pq_Check.outcome(name, is_observed, is_expected)
        self.checks.append(check)
        return check

    def add_spectrum(self, name: str, spectrum: Pq_BS_Spectrum) -> Pq_Spectrum_Table:
        table = Pq_Spectrum_Table.from_spectrum(name, spectrum)
        self.spectra.append(table)
        return table

    def add_plot(self, name: str, xs, ys, comment: str = "") -> None:
        self.plots.append(Pq_Plot_Data(name, tuple(float(x) for x in xs), tuple(float(y) for y in ys), comment))

    def failed_checks(self) -> list[Pq_Check]:
        return [check for check in self.checks if not check.passed]

    # > Key-value tree
    def to_config(self) -> configparser.ConfigParser:
        config = new_config()
        config["report"] = {
            "scenario": self.scenario,
            "passed": str(self.passed),
            "seed": str(self.seed),
            "duration": repr(float(self.duration)),
        }
        config["conventions"] = dict(self.conventions)
        config["parameters"] = dict(self.parameters)
        for i, check in enumerate(self.checks):
            config[f"check.{i}"] = {
                "name": check.name,
                "residual": repr(check.residual),
                "tolerance": repr(check.tolerance),
                "relation": check.relation,
                "passed": str(check.passed),
            }
        for i, table in enumerate(self.spectra):
            config[f"spectrum.{i}"] = {
                "name": table.name,
                "connection": table.connection,
                "levels": _join(table.levels),
                "holonomy_re": _join(table.holonomy_re),
                "holonomy_im": _join(table.holonomy_im),
                "residuals": _join(table.residuals),
                "singular_levels": _join(table.singular_levels),
                "is_continuum": str(table.is_continuum),
            }
        return config

    @classmethod
    def from_config(cls, config: configparser.ConfigParser) -> "Pq_Report":
        head = config["report"]
        checks = []
        spectra = []
        for section in config.sections():
            values = config[section]
            if section.startswith("check."):
                checks.append(
                    (
                        int(section.removeprefix("check.")),
                        Pq_Check(
                            values["name"],
                            float(values["residual"]),
                            float(values["tolerance"]),
                            values["relation"],
                            values.getboolean("passed"),
                        ),
                    )
                )
            elif section.startswith("spectrum."):
                spectra.append(
                    (
                        int(section.removeprefix("spectrum.")),
                        Pq_Spectrum_Table(
                            values["name"],
                            values["connection"],
                            _split(values["levels"]),
                            _split(values["holonomy_re"]),
                            _split(values["holonomy_im"]),
                            _split(values["residuals"]),
                            _split(values["singular_levels"]),
                            values.getboolean("is_continuum"),
                        ),
                    )
                )
        return cls(
            scenario=head["scenario"],
            seed=int(head["seed"]),
            parameters=dict(config["parameters"]) if config.has_section("parameters") else {},
            conventions=dict(config["conventions"]) if config.has_section("conventions") else {},
            checks=[check for _, check in sorted(checks)],
            spectra=[table for _, table in sorted(spectra)],
            duration=float(head["duration"]),
        )

    def dump(self, path: str | Path) -> None:
        Pq_IO.dump_config(self.to_config(), path)

    @classmethod
    def load(cls, path: str | Path) -> "Pq_Report":
        return cls.from_config(Pq_IO.load_config(path))


def _join(values) -> str:
    return ",".join(repr(float(v)) for v in values)


def _split(text: str) -> tuple[float, ...]:
    return tuple(float(item) for item in text.split(",") if item.strip())


REPORT_NAME = "report.ini"


def emit_report(report: Pq_Report, directory: str | Path, *, is_xlsx: bool = False) -> list[Path]:
    """Write the report tree, one CSV per spectrum and one two-column file per plot into directory."""
    directory = Path(directory)
    success, err_msg = Pq_IO.is_writable(directory)
    if not success:
        raise OSError(err_msg)
    written = [directory / REPORT_NAME]
    report.dump(written[0])
    for table in report.spectra:
        path = directory / f"spectrum_{table.name}.csv"
        Pq_IO.dump_csv(table.rows(), path)
        written.append(path)
    for plot in report.plots:
        path = directory / f"{plot.name}.dat"
        Pq_IO.dump_columns(plot.xs, plot.ys, path, plot.comment)
        written.append(path)
    if is_xlsx and report.spectra:
        path = directory / "spectra.xlsx"
        Pq_IO.dump_xlsx({table.name: table.rows() for table in report.spectra}, path)
        written.append(path)
    logging.info(f"Wrote {len(written)} files for {report.scenario} to {directory}")
    return written
