#!/usr/bin/env python3

import logging
from collections.abc import Callable, Sequence

import numpy as np

from prequant.pq_exceptions import (
    ChartMismatchError,
    ContractError,
    CurvatureMismatchError,
    H1ObstructionError,
    HermitianViolationError,
    NonIntegralPeriodError,
    NotClosedError,
    OpenPathError,
    PathDependenceError,
    UnknownRegionError,
)
from prequant.pq_bundle.pq_connection import Pq_Prequantum_Connection
from prequant.pq_geometry.pq_charts import CIRCLE, Pq_Chart, Pq_Point
from prequant.pq_geometry.pq_fields import FD_STEP, Pq_Scalar_Field, Pq_Smooth_Map, Reality, as_points
from prequant.pq_geometry.pq_forms import Pq_Differential_Form, exterior_derivative
from prequant.pq_geometry.pq_paths import Pq_Path
from prequant.pq_geometry.pq_quadrature import GAUSS_ORDER, gauss_legendre
from prequant.pq_symplectic.pq_averaging import AVERAGING_NODES, Pq_Circle_Action, average_over_circle
from prequant.pq_utils import TWO_PI, distance_to_lattice, nearest_multiple

BASE_TOLERANCE = 1e-6
CLOSED_TOLERANCE = 1e-6
# Differences of connections pulled back by numerical maps carry nested finite differences
NUMERIC_CLOSED_TOLERANCE = 1e-5
PERIOD_TOLERANCE = 1e-6
PATH_TOLERANCE = 1e-5
GAUGE_TOLERANCE = 1e-5
PATH_CHECK_SAMPLES = 50

# (starts, ends) -> list of (n, dim) corner arrays from start to end
PathFamily = Callable[[np.ndarray, np.ndarray], list[np.ndarray]]


class Pq_Connection_Difference:
    def __init__(
        self,
        xi: Pq_Differential_Form,
        *,
        is_hermitian: bool = True,
        closed_tol: float = CLOSED_TOLERANCE,
        fd_step: float = FD_STEP,
        samples: int = 200,
        seed: int = 0,
    ) -> None:
        """
        xi = alpha_b - alpha_a, the difference of the real potentials of two connections with equal curvature.

        :param closed_tol: bound on the sampled sup |d xi|
        """
        if xi.degree != 1:
            raise ContractError(f"connection differences are 1-forms, got degree {xi.degree}")
        self.xi = xi
        self.is_hermitian = is_hermitian
        self.fd_step = fd_step
        if xi.is_zero or xi.chart.dim == 1:
            self.residual = 0.0
        else:
            pts = xi.chart.sample(samples, np.random.default_rng(seed))
            self.residual = exterior_derivative(xi, fd_step).sup_norm(pts)
        if self.residual > closed_tol:
            raise NotClosedError(f"connection difference is not closed: sup |d xi| = {self.residual:.3e}")

    def __repr__(self) -> str:
        return f"Pq_Connection_Difference({self.xi.name}, residual={self.residual:.3e})"

    @property
    def chart(self) -> Pq_Chart:
        return self.xi.chart

    @classmethod
    def from_form(cls, xi: Pq_Differential_Form, **kwargs) -> "Pq_Connection_Difference":
        return cls(xi, is_hermitian=xi.reality == "real", **kwargs)


def connection_difference(
    a: Pq_Prequantum_Connection,
    b: Pq_Prequantum_Connection,
    *,
    base_tol: float = BASE_TOLERANCE,
) -> Pq_Connection_Difference:
    """xi = alpha_b - alpha_a, checked for equal curvature and consistency across regions."""
    if a.chart != b.chart:
        raise ChartMismatchError(f"{a.name} and {b.name} live on different charts")
    if set(a.regions) != set(b.regions):
        raise UnknownRegionError(f"regions differ: {a.regions} vs {b.regions}")
    pts = a.chart.sample(a.samples, np.random.default_rng(a.seed))
    base_residual = (b.base.form - a.base.form).sup_norm(pts)
    if base_residual > base_tol:
        raise CurvatureMismatchError(base_residual, base_tol)

    for key in set(a.transitions) | set(b.transitions):
        src, dst = key
        gap = b.transition_phase(src, dst, pts) - a.transition_phase(src, dst, pts)
        if np.ptp(gap) > base_tol:
            raise ContractError(f"transition phases {src}->{dst} of {a.name} and {b.name} differ by a nonconstant")
    if sorted(cut.axis for cut in a.cuts) != sorted(cut.axis for cut in b.cuts):
        raise ContractError(f"{a.name} and {b.name} have periodic cuts on different axes")
    b_cuts = {cut.axis: cut for cut in b.cuts}
    for cut in a.cuts:
        if np.ptp(b_cuts[cut.axis].phase(pts) - cut.phase(pts)) > base_tol:
            raise ContractError(f"periodic cuts of {a.name} and {b.name} differ on axis {cut.axis}")

    regions = a.regions
    differences = {region: b.potential(region) - a.potential(region) for region in regions}
    xi = differences[regions[0]]
    for region in regions[1:]:
        gap = (differences[region] - xi).sup_norm(pts)
        if gap > base_tol:
            raise ContractError(f"connection difference disagrees between regions {regions[0]} and {region}: {gap:.3e}")
    xi.name = f"xi({b.name}-{a.name})"

    fd_step = max(a.fd_step, b.fd_step)
    is_numeric = max(a.curvature_tol, b.curvature_tol) > CLOSED_TOLERANCE
    return Pq_Connection_Difference(
        xi,
        is_hermitian=a.is_hermitian and b.is_hermitian,
        closed_tol=NUMERIC_CLOSED_TOLERANCE if is_numeric else CLOSED_TOLERANCE,
        fd_step=fd_step,
        samples=a.samples,
        seed=a.seed,
    )


def _xi_form(xi: Pq_Connection_Difference | Pq_Differential_Form) -> Pq_Differential_Form:
    return xi.xi if isinstance(xi, Pq_Connection_Difference) else xi


def periods(xi: Pq_Connection_Difference | Pq_Differential_Form, loops: Sequence[Pq_Path]) -> list[complex]:
    form = _xi_form(xi)
    values = []
    for loop in loops:
        if not loop.is_closed:
            raise OpenPathError(f"periods are taken over closed loops, {loop.name} is open")
        values.append(loop.line_integral(form))
    return values


def default_probe_loops(chart: Pq_Chart) -> list[Pq_Path]:
    """Loops generating the first homology the models need: the equator, or both torus circles."""
    if chart.genus == 0 and "theta" in chart.coord_names:
        return [Pq_Path.latitude(0.0, chart=chart)]
    if chart.genus == 1:
        return [
            Pq_Path.coordinate_circle(chart, 0, (0.0, 0.0)),
            Pq_Path.coordinate_circle(chart, 1, (0.0, 0.0)),
        ]
    if chart.ball_radius is not None and chart.dim == 2:
        return [Pq_Path.circle(chart, (0.0, 0.0), 0.5 * chart.ball_radius)]
    return []


# > Canonical path families
def _radial_family(starts: np.ndarray, ends: np.ndarray) -> list[np.ndarray]:
    return [starts, ends]


def _through_origin_family(starts: np.ndarray, ends: np.ndarray) -> list[np.ndarray]:
    return [starts, np.zeros_like(starts), ends]


def _axis_family(order: Sequence[int]) -> PathFamily:
    """Axis-aligned moves, one coordinate at a time in the given order."""

    def family(starts: np.ndarray, ends: np.ndarray) -> list[np.ndarray]:
        corners = [starts]
        current = starts.copy()
        for axis in order:
            current = current.copy()
            current[:, axis] = ends[:, axis]
            corners.append(current)
        return corners

    return family


def path_families(chart: Pq_Chart) -> tuple[PathFamily, PathFamily]:
    """Primary and secondary path families from a basepoint used to integrate closed 1-forms."""
    if chart.is_star_shaped:
        return _radial_family, _through_origin_family
    if chart.dim == 2 and "theta" in chart.coord_names and "z" in chart.coord_names:
        itheta, iz = chart.index("theta"), chart.index("z")
        # fixed theta first (move in z), then fixed z
        return _axis_family((iz, itheta)), _axis_family((itheta, iz))
    return _axis_family(tuple(range(chart.dim))), _axis_family(tuple(reversed(range(chart.dim))))


def integrate_along(
    form: Pq_Differential_Form, family: PathFamily, basepoint: np.ndarray, pts: np.ndarray, order: int = GAUSS_ORDER
) -> np.ndarray:
    """Integral of a 1-form from the basepoint to each point along the family's piecewise linear path."""
    pts = as_points(pts, form.chart.dim)
    starts = np.broadcast_to(basepoint, pts.shape).copy()
    corners = family(starts, pts)
    nodes, weights = gauss_legendre(order, 0.0, 1.0)
    total = np.zeros(pts.shape[0], dtype=complex)
    for a, b in zip(corners, corners[1:]):
        delta = b - a
        if not np.any(delta):
            continue
        samples = (a[None, :, :] + nodes[:, None, None] * delta[None, :, :]).reshape(-1, pts.shape[1])
        comps = form.components(samples, is_validate=False).reshape(len(nodes), pts.shape[0], pts.shape[1])
        total += np.einsum("q,qnd,nd->n", weights, comps, delta)
    return total


class Pq_Gauge_Function:
    def __init__(
        self,
        phi: Pq_Scalar_Field,
        chart: Pq_Chart,
        basepoint,
        *,
        is_hermitian: bool = True,
        differential: Pq_Differential_Form | None = None,
        name: str = "",
    ) -> None:
        """
        :param basepoint: point where phi vanishes
        :param differential: d phi when it is known in closed form, used by apply_gauge instead of differencing
        """
        if is_hermitian and phi.reality not in ("imaginary",):
            raise HermitianViolationError(f"hermitian gauge functions are imaginary, {phi!r} is {phi.reality}")
        self.phi = phi
        self.chart = chart
        self.basepoint = np.asarray(basepoint.array if isinstance(basepoint, Pq_Point) else basepoint, dtype=float)
        self.is_hermitian = is_hermitian
        self.known_differential = differential
        self.name = name or phi.name or "phi"

    def __repr__(self) -> str:
        return f"Pq_Gauge_Function({self.name}, hermitian={self.is_hermitian})"

    def __call__(self, pts) -> np.ndarray:
        return self.phi(pts)

    def differential(self) -> Pq_Differential_Form:
        if self.known_differential is not None:
            return self.known_differential
        return exterior_derivative(Pq_Differential_Form.function(self.chart, self.phi))

    def gauge_residual(self, xi: Pq_Connection_Difference | Pq_Differential_Form, pts) -> float:
        """sup |d phi - i xi| with d phi differenced from phi itself."""
        form = _xi_form(xi)
        arr = as_points(pts, self.chart.dim)
        dphi = self.phi.gradient(arr)
        return float(np.max(np.abs(dphi - 1j * form.components(arr, is_validate=False)), initial=0.0))

    @classmethod
    def from_potential(cls, psi: Pq_Scalar_Field, chart: Pq_Chart, basepoint=None) -> "Pq_Gauge_Function":
        """phi = i (psi - psi(basepoint)) for a real psi; apply_gauge then shifts every potential by d psi."""
        base = np.zeros(chart.dim) if basepoint is None else np.asarray(
            basepoint.array if isinstance(basepoint, Pq_Point) else basepoint, dtype=float
        )
        offset = float(np.real(psi(base[None, :]))[0])
        phi = (psi - offset).scale(1j)
        phi.name = f"i*{psi.name}"
        return cls(phi, chart, base, is_hermitian=psi.reality == "real", name=phi.name)

    def averaged(self, action: Pq_Circle_Action, nodes: int = AVERAGING_NODES) -> "Pq_Gauge_Function":
        """Haar average over the action, shifted back to vanish at the basepoint."""
        avg = average_over_circle(action, self.phi, nodes)
        offset = complex(avg(self.basepoint[None, :])[0])
        if self.is_hermitian:
            offset = 1j * offset.imag
        phi = avg - offset
        phi.reality = self.phi.reality
        phi.name = f"avg({self.name})"
        differential = None
        if self.known_differential is not None:
            differential = average_over_circle(action, self.known_differential, nodes)
        return Pq_Gauge_Function(
            phi, self.chart, self.basepoint, is_hermitian=self.is_hermitian, differential=differential, name=phi.name
        )


def _check_periods(form: Pq_Differential_Form, loops: Sequence[Pq_Path]) -> None:
    for loop, period in zip(loops, periods(form, loops)):
        if abs(period) > PERIOD_TOLERANCE:
            raise H1ObstructionError(loop.name, period)


def _check_families(
    form: Pq_Differential_Form,
    basepoint: np.ndarray,
    pts: np.ndarray,
    *,
    is_unit_circle: bool = False,
) -> float:
    primary, secondary = path_families(form.chart)
    first = integrate_along(form, primary, basepoint, pts)
    second = integrate_along(form, secondary, basepoint, pts)
    if is_unit_circle:
        gap = float(np.max(np.abs(np.exp(1j * first) - np.exp(1j * second)), initial=0.0))
    else:
        gap = float(np.max(np.abs(first - second), initial=0.0))
    if gap > PATH_TOLERANCE:
        raise PathDependenceError(f"path families disagree by {gap:.3e}")
    return gap


def recover_gauge(
    xi: Pq_Connection_Difference,
    basepoint: Pq_Point | Sequence[float],
    probe_loops: Sequence[Pq_Path] | None = None,
    *,
    seed: int = 0,
) -> Pq_Gauge_Function:
    """
    phi = i * int_{basepoint}^p xi along the chart's primary path family, after checking that xi has no
    periods on the probe loops and that a second path family agrees.
    """
    form = xi.xi
    chart = form.chart
    base = np.asarray(basepoint.array if isinstance(basepoint, Pq_Point) else basepoint, dtype=float)
    chart.validate(base[None, :], what="gauge basepoint")
    loops = list(probe_loops) if probe_loops is not None else default_probe_loops(chart)
    _check_periods(form, loops)

    pts = chart.sample(PATH_CHECK_SAMPLES, np.random.default_rng(seed))
    gap = _check_families(form, base, pts)
    logging.debug(f"Recovered gauge for {form.name}: path family gap {gap:.3e} over {len(loops)} probe loops")

    primary, _ = path_families(chart)

    def evaluator(p: np.ndarray) -> np.ndarray:
        return 1j * integrate_along(form, primary, base, p)

    reality: Reality = "imaginary" if xi.is_hermitian else "complex"
    phi = Pq_Scalar_Field(evaluator, reality=reality, name=f"phi[{form.name}]")
    return Pq_Gauge_Function(
        phi, chart, base, is_hermitian=xi.is_hermitian, differential=form.scale(1j), name=phi.name
    )


def apply_gauge(conn: Pq_Prequantum_Connection, gauge: Pq_Gauge_Function) -> Pq_Prequantum_Connection:
    """Every potential shifted by -i d phi."""
    if gauge.chart != conn.chart:
        raise ChartMismatchError(f"{gauge!r} lives on {gauge.chart.name}, {conn.name} on {conn.chart.name}")
    if conn.is_hermitian:
        if not gauge.is_hermitian:
            raise HermitianViolationError(f"{conn.name} is hermitian, {gauge!r} is not imaginary")
        gauge.phi.check_reality(conn.chart.sample(conn.samples, np.random.default_rng(conn.seed)))
    shift = gauge.differential().scale(-1j)
    shift.name = f"-i d{gauge.name}"
    return conn.shifted(shift, name=f"{conn.name}*{gauge.name}")


class Pq_Circle_Map(Pq_Smooth_Map):
    def __init__(self, xi: Pq_Differential_Form, basepoint: np.ndarray) -> None:
        """t: M -> S^1 with angle int_{basepoint}^p xi along the primary path family, t^* dtheta = xi."""
        self.xi = xi
        self.basepoint = basepoint
        self.primary, _ = path_families(xi.chart)
        super().__init__(xi.chart, CIRCLE, self._angle_map, name=f"circle_map[{xi.name}]")

    def angle(self, pts) -> np.ndarray:
        return np.real(integrate_along(self.xi, self.primary, self.basepoint, as_points(pts, self.source.dim)))

    def _angle_map(self, pts: np.ndarray) -> np.ndarray:
        return self.angle(pts)[:, None]

    def unit_complex(self, pts) -> np.ndarray:
        return np.exp(1j * self.angle(pts))


def circle_map(
    xi: Pq_Connection_Difference,
    basepoint: Pq_Point | Sequence[float],
    generators: Sequence[Pq_Path] | None = None,
    *,
    seed: int = 0,
) -> Pq_Circle_Map:
    """Map into the unit circle pulling dtheta back to xi, defined when every generator period lies in 2 pi Z."""
    form = xi.xi
    if form.reality != "real":
        raise HermitianViolationError(f"circle maps need a real connection difference, {form.name} is {form.reality}")
    chart = form.chart
    base = np.asarray(basepoint.array if isinstance(basepoint, Pq_Point) else basepoint, dtype=float)
    chart.validate(base[None, :], what="circle map basepoint")
    loops = list(generators) if generators is not None else default_probe_loops(chart)
    for loop, period in zip(loops, periods(form, loops)):
        if distance_to_lattice(period.real, TWO_PI) > PERIOD_TOLERANCE or abs(period.imag) > PERIOD_TOLERANCE:
            raise NonIntegralPeriodError(period, nearest_multiple(period.real, TWO_PI))
        logging.debug(f"Circle map: period of {form.name} on {loop.name} is 2pi*{nearest_multiple(period.real)}")
    pts = chart.sample(PATH_CHECK_SAMPLES, np.random.default_rng(seed))
    _check_families(form, base, pts, is_unit_circle=True)
    return Pq_Circle_Map(form, base)
