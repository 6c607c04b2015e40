#!/usr/bin/env python3

import logging
from collections.abc import Iterable, Sequence
from typing import NamedTuple

import numpy as np
from scipy.optimize import bisect

from prequant.pq_bundle.pq_connection import Pq_Prequantum_Connection, holonomy
from prequant.pq_bundle.pq_gauge import Pq_Gauge_Function, apply_gauge
from prequant.pq_exceptions import (
    ChartMismatchError,
    ContractError,
    DomainError,
    IndependenceFailureError,
    NonIntegralClassError,
    RefinementError,
)
from prequant.pq_geometry.pq_charts import Pq_Chart
from prequant.pq_geometry.pq_fields import Pq_Scalar_Field
from prequant.pq_geometry.pq_forms import Pq_Differential_Form
from prequant.pq_quantization.pq_fibration import Pq_Lagrangian_Fibration
from prequant.pq_symplectic.pq_linear import Pq_Symplectic_Form
from prequant.pq_utils import TWO_PI, dedupe_sorted, distance_to_lattice, nearest_multiple, wrap_phase

GRID_STEP = 0.01
ROOT_TOLERANCE = 1e-10
INTEGRALITY_TOLERANCE = 1e-6
DEDUPE_TOLERANCE = 1e-8
LEVEL_TOLERANCE = 1e-6
# Unwrapped phases this close to 2 pi Z at a grid point count as a root there
GRID_ROOT_TOLERANCE = 1e-9


def leaf_holonomy(
    conn: Pq_Prequantum_Connection, fib: Pq_Lagrangian_Fibration, b: float
) -> complex | tuple[complex, ...]:
    """Holonomy of the leaf over b, a tuple when the leaf has several generator loops."""
    if fib.chart != conn.chart:
        raise ChartMismatchError(f"{fib.name} lives on {fib.chart.name}, {conn.name} on {conn.chart.name}")
    values = tuple(holonomy(conn, loop) for loop in fib.leaf(b))
    return values[0] if len(values) == 1 else values


def _leaf_holonomies(conn: Pq_Prequantum_Connection, fib: Pq_Lagrangian_Fibration, b: float) -> np.ndarray:
    value = leaf_holonomy(conn, fib, b)
    return np.atleast_1d(np.asarray(value, dtype=complex))


class Pq_Phase_Scan(NamedTuple):
    levels: np.ndarray
    # (n_levels, n_loops)
    holonomies: np.ndarray
    phases: np.ndarray


def phase_scan(conn: Pq_Prequantum_Connection, fib: Pq_Lagrangian_Fibration, grid_step: float = GRID_STEP) -> Pq_Phase_Scan:
    """Leaf holonomies on the base grid and their phases, unwrapped along the grid per generator loop."""
    levels = fib.grid(grid_step)
    holonomies = np.stack([_leaf_holonomies(conn, fib, float(b)) for b in levels])
    phases = np.unwrap(np.angle(holonomies), axis=0)
    logging.debug(f"Phase scan of {conn.name} over {fib.name}: {len(levels)} levels, step {levels[1] - levels[0]:.3e}")
    return Pq_Phase_Scan(levels, holonomies, phases)


class Pq_BS_Spectrum(NamedTuple):
    regular_levels: tuple[float, ...]
    singular_levels: tuple[float, ...]
    holonomies: tuple[complex, ...]
    residuals: tuple[float, ...]
    connection: str
    is_continuum: bool = False

    @property
    def count(self) -> int:
        """Regular plus singular levels."""
        return len(self.regular_levels) + len(self.singular_levels)

    def rows(self) -> list[tuple[float, float, float, float]]:
        """(level, holonomy_re, holonomy_im, residual), singular levels carry nan."""
        rows = [(level, hol.real, hol.imag, res) for level, hol, res in zip(self.regular_levels, self.holonomies, self.residuals)]
        rows.extend((level, np.nan, np.nan, np.nan) for level in self.singular_levels)
        return sorted(rows, key=lambda row: row[0])


def _local_phase(conn, fib, anchor: float):
    """Phase of the first generator continued from the unwrapped value `anchor`."""

    def phase(b: float) -> float:
        hol = _leaf_holonomies(conn, fib, b)[0]
        return anchor + float(wrap_phase(np.angle(hol) - anchor))

    return phase


def _cell_roots(conn, fib, scan: Pq_Phase_Scan, root_tol: float) -> list[float]:
    levels, phases = scan.levels, scan.phases[:, 0]
    roots = [float(b) for b, phi in zip(levels, phases) if distance_to_lattice(phi) <= GRID_ROOT_TOLERANCE]
    for i in range(len(levels) - 1):
        lo, hi = sorted((phases[i], phases[i + 1]))
        n_lo = int(np.ceil((lo + GRID_ROOT_TOLERANCE) / TWO_PI))
        n_hi = int(np.floor((hi - GRID_ROOT_TOLERANCE) / TWO_PI))
        if n_hi < n_lo:
            continue
        if n_hi > n_lo:
            raise RefinementError(
                f"{n_hi - n_lo + 1} integral levels between {levels[i]} and {levels[i + 1]}, reduce the grid step"
            )
        target = TWO_PI * n_lo
        phase = _local_phase(conn, fib, float(phases[i]))
        roots.append(bisect(lambda b: phase(b) - target, float(levels[i]), float(levels[i + 1]), xtol=root_tol))
    return roots


def _dedupe(fib: Pq_Lagrangian_Fibration, roots: Iterable[float]) -> list[float]:
    levels = dedupe_sorted((fib.reduce(b) for b in roots), DEDUPE_TOLERANCE)
    if fib.is_periodic_base and len(levels) > 1:
        period = fib.period
        assert period is not None
        if levels[0] + period - levels[-1] <= DEDUPE_TOLERANCE:
            levels.pop()
    return levels


def bs_spectrum(
    conn: Pq_Prequantum_Connection,
    fib: Pq_Lagrangian_Fibration,
    grid_step: float = GRID_STEP,
    root_tol: float = ROOT_TOLERANCE,
) -> Pq_BS_Spectrum:
    """
    Levels whose leaves have trivial holonomy on every generator loop.

    Roots of the first generator's unwrapped phase minus 2 pi n are bracketed on the base grid and bisected
    to root_tol; further generators filter the candidates. Leaves integral over the whole grid are reported
    as a continuum instead of a list.
    """
    scan = phase_scan(conn, fib, grid_step)
    if np.all(np.abs(scan.holonomies - 1.0) <= INTEGRALITY_TOLERANCE):
        logging.info(f"Every leaf of {fib.name} is integral for {conn.name}")
        return Pq_BS_Spectrum((), fib.singular_levels, (), (), conn.name, is_continuum=True)

    regular, holonomies, residuals = [], [], []
    for b in _dedupe(fib, _cell_roots(conn, fib, scan, root_tol)):
        hols = _leaf_holonomies(conn, fib, b)
        residual = float(np.max(np.abs(hols - 1.0)))
        if residual > INTEGRALITY_TOLERANCE:
            if abs(hols[0] - 1.0) > INTEGRALITY_TOLERANCE:
                raise RefinementError(f"bisected level {b} of {fib.name} has holonomy residual {residual:.3e}")
            # integral on the first generator only
            continue
        regular.append(b)
        holonomies.append(complex(hols[0]))
        residuals.append(residual)
    logging.debug(f"Bohr-Sommerfeld levels of {conn.name}: {regular}")
    return Pq_BS_Spectrum(tuple(regular), fib.singular_levels, tuple(holonomies), tuple(residuals), conn.name)


def spectrum_deviation(a: Pq_BS_Spectrum, b: Pq_BS_Spectrum) -> float:
    """Largest level-wise distance of two sorted spectra, inf when they differ in length or kind."""
    if a.is_continuum != b.is_continuum or len(a.regular_levels) != len(b.regular_levels):
        return np.inf
    return max((abs(x - y) for x, y in zip(a.regular_levels, b.regular_levels)), default=0.0)


def integral_leaf_agreement(
    a: Pq_Prequantum_Connection,
    b: Pq_Prequantum_Connection,
    fib: Pq_Lagrangian_Fibration,
    levels: Sequence[float],
    tol: float = INTEGRALITY_TOLERANCE,
) -> bool:
    """Whether each leaf is integral for a exactly when it is integral for b."""
    for level in levels:
        is_a = bool(np.all(np.abs(_leaf_holonomies(a, fib, level) - 1.0) <= tol))
        is_b = bool(np.all(np.abs(_leaf_holonomies(b, fib, level) - 1.0) <= tol))
        if is_a != is_b:
            logging.debug(f"Leaf {level} of {fib.name}: integral for {a.name} is {is_a}, for {b.name} is {is_b}")
            return False
    return True


def sphere_trig_potential(coefficients, chart: Pq_Chart, name: str = "") -> Pq_Scalar_Field:
    """
    psi = (1 - z^2) sum_{m,n} (a_mn cos(m theta) + b_mn sin(m theta)) z^n, smooth across the poles.

    :param coefficients: array of shape (2, M, N) holding a_mn and b_mn
    """
    coeffs = np.asarray(coefficients, dtype=float)
    itheta, iz = chart.index("theta"), chart.index("z")
    orders = np.arange(coeffs.shape[1])
    powers = np.arange(coeffs.shape[2])

    def parts(pts: np.ndarray):
        theta, z = pts[:, itheta], pts[:, iz]
        cos, sin = np.cos(np.outer(theta, orders)), np.sin(np.outer(theta, orders))
        zp = z[:, None] ** powers
        dzp = np.where(powers > 0, powers * z[:, None] ** np.maximum(powers - 1, 0), 0.0)
        trig = np.einsum("nm,mk->nk", cos, coeffs[0]) + np.einsum("nm,mk->nk", sin, coeffs[1])
        dtrig = np.einsum("nm,mk->nk", -sin * orders, coeffs[0]) + np.einsum("nm,mk->nk", cos * orders, coeffs[1])
        return z, np.sum(trig * zp, axis=1), np.sum(dtrig * zp, axis=1), np.sum(trig * dzp, axis=1)

    def evaluator(pts: np.ndarray) -> np.ndarray:
        z, g, _, _ = parts(pts)
        return (1 - z**2) * g

    def gradient(pts: np.ndarray) -> np.ndarray:
        z, g, g_theta, g_z = parts(pts)
        grad = np.zeros(pts.shape)
        grad[:, itheta] = (1 - z**2) * g_theta
        grad[:, iz] = -2 * z * g + (1 - z**2) * g_z
        return grad

    return Pq_Scalar_Field(evaluator, gradient=gradient, name=name or f"trig{coeffs.shape[1:]}")


def random_sphere_potentials(count: int, chart: Pq_Chart, *, seed: int = 0, orders: int = 3, powers: int = 3) -> list[Pq_Scalar_Field]:
    rng = np.random.default_rng(seed)
    return [
        sphere_trig_potential(rng.normal(scale=0.5, size=(2, orders, powers)), chart, name=f"psi_{i}")
        for i in range(count)
    ]


class Pq_Independence_Report(NamedTuple):
    reference: Pq_BS_Spectrum
    spectra: tuple[Pq_BS_Spectrum, ...]
    deviations: tuple[float, ...]
    max_deviation: float


def independence_experiment(
    conn: Pq_Prequantum_Connection,
    fib: Pq_Lagrangian_Fibration,
    perturbations: Sequence[Pq_Scalar_Field],
    *,
    grid_step: float = GRID_STEP,
    root_tol: float = ROOT_TOLERANCE,
    tol: float = LEVEL_TOLERANCE,
) -> Pq_Independence_Report:
    """Spectra of conn and of conn + d psi for each psi, which must agree level by level."""
    chart = conn.chart
    if not (chart.is_star_shaped or chart.genus == 0):
        raise ContractError(f"{chart.name} has nontrivial first cohomology, exact shifts do not exhaust gauges")
    reference = bs_spectrum(conn, fib, grid_step, root_tol)
    spectra, deviations = [], []
    for psi in perturbations:
        shifted = apply_gauge(conn, Pq_Gauge_Function.from_potential(psi, chart))
        spectrum = bs_spectrum(shifted, fib, grid_step, root_tol)
        deviation = spectrum_deviation(reference, spectrum)
        logging.debug(f"Perturbation {psi.name}: level deviation {deviation:.3e}")
        if deviation > tol:
            raise IndependenceFailureError(
                f"spectrum of {shifted.name} deviates by {deviation!r} from {reference.regular_levels}"
            )
        spectra.append(spectrum)
        deviations.append(deviation)
    return Pq_Independence_Report(reference, tuple(spectra), tuple(deviations), max(deviations, default=0.0))


class Pq_Shift_Outcome(NamedTuple):
    c: float
    spectrum: Pq_BS_Spectrum
    is_changed: bool
    is_expected_changed: bool


class Pq_Counterexample_Report(NamedTuple):
    reference: Pq_BS_Spectrum
    outcomes: tuple[Pq_Shift_Outcome, ...]

    @property
    def is_consistent(self) -> bool:
        """The spectrum changed exactly for the non-integral shifts."""
        return all(o.is_changed == o.is_expected_changed for o in self.outcomes)


def torus_counterexample(
    conn: Pq_Prequantum_Connection,
    fib: Pq_Lagrangian_Fibration,
    c_values: Iterable[float],
    *,
    grid_step: float = GRID_STEP,
    root_tol: float = ROOT_TOLERANCE,
    tol: float = LEVEL_TOLERANCE,
) -> Pq_Counterexample_Report:
    """Shift the potential by the closed, non-exact c dtheta1 and record whether the spectrum moves."""
    chart = conn.chart
    if chart.genus != 1:
        raise DomainError(f"the shift c dtheta1 needs the torus chart, got {chart.name}")
    reference = bs_spectrum(conn, fib, grid_step, root_tol)
    outcomes = []
    for c in c_values:
        shift = Pq_Differential_Form.basis(chart, "theta1", coefficient=float(c))
        shift.name = f"{c}dtheta1"
        spectrum = bs_spectrum(conn.shifted(shift), fib, grid_step, root_tol)
        is_changed = spectrum_deviation(reference, spectrum) > tol
        is_expected_changed = distance_to_lattice(float(c), 1.0) > tol
        logging.info(f"Torus shift c = {c}: spectrum changed {is_changed}, expected {is_expected_changed}")
        outcomes.append(Pq_Shift_Outcome(float(c), spectrum, is_changed, is_expected_changed))
    return Pq_Counterexample_Report(reference, tuple(outcomes))


def riemann_roch_surface(omega: Pq_Symplectic_Form, genus: int, tol: float = INTEGRALITY_TOLERANCE) -> int:
    """round(int omega / 2 pi) + 1 - genus for an integral class on a closed surface chart."""
    chart = omega.chart
    if not chart.is_closed_surface:
        raise DomainError(f"{chart.name} is not a closed surface")
    if genus != chart.genus:
        raise ContractError(f"{chart.name} has genus {chart.genus}, got {genus}")
    integral = float(np.real(omega.total_integral()))
    if distance_to_lattice(integral) > tol:
        raise NonIntegralClassError(integral)
    return nearest_multiple(integral) + 1 - genus
