#!/usr/bin/env python3

import logging
from collections.abc import Callable, Iterable, Mapping, Sequence
from typing import Any, NamedTuple

import numpy as np
from scipy.optimize import brentq

from prequant.pq_exceptions import (
    ChartMismatchError,
    ContractError,
    CurvatureMismatchError,
    HermitianViolationError,
    NonIntegralClassError,
    OpenPathError,
    RegionScheduleError,
    UnknownRegionError,
)
from prequant.pq_geometry.pq_charts import DISK, SPHERE_CYL, TORUS, TORUS4, Pq_Chart
from prequant.pq_geometry.pq_fields import FD_STEP, Pq_Scalar_Field, Pq_Smooth_Map, central_difference
from prequant.pq_geometry.pq_forms import Pq_Differential_Form, exterior_derivative, pullback_form
from prequant.pq_geometry.pq_paths import Pq_Path
from prequant.pq_geometry.pq_quadrature import GAUSS_ORDER, TRAPEZOID_NODES
from prequant.pq_symplectic.pq_linear import Pq_Symplectic_Form
from prequant.pq_symplectic.pq_primitives import poincare_primitive
from prequant.pq_utils import TWO_PI, distance_to_lattice

CURVATURE_TOLERANCE = 1e-6
PULLBACK_TOLERANCE = 1e-5
# Connections pulled back by maps without analytic Jacobians are differentiated twice numerically
NUMERIC_PULLBACK_TOLERANCE = 1e-3
NUMERIC_PULLBACK_FD_STEP = 1e-4
OVERLAP_TOLERANCE = 1e-6
INTEGRALITY_TOLERANCE = 1e-6
# Samples per parameter interval when locating crossings of a periodic cut
CUT_SCAN_POINTS = 257

# Transition phase w: (n, dim) -> (n,), switching from the source to the target region multiplies by exp(i w)
PhaseFunction = Callable[[np.ndarray], np.ndarray]


class Pq_Periodic_Cut(NamedTuple):
    """A potential that is discontinuous where a periodic coordinate wraps.

    Crossing the cut in the increasing direction of `axis` multiplies parallel transport by exp(i phase(p)),
    crossing it backwards by exp(-i phase(p)).
    """

    axis: int
    phase: PhaseFunction


class Pq_Prequantum_Connection:
    def __init__(
        self,
        base: Pq_Symplectic_Form,
        potentials: Mapping[str, Pq_Differential_Form],
        *,
        transitions: Mapping[tuple[str, str], PhaseFunction] | None = None,
        cuts: Sequence[Pq_Periodic_Cut] = (),
        poles: Mapping[str, float] | None = None,
        is_hermitian: bool = True,
        name: str = "",
        curvature_tol: float = CURVATURE_TOLERANCE,
        fd_step: float = FD_STEP,
        samples: int = 200,
        seed: int = 0,
        is_check_poles: bool = True,
        is_check_integrality: bool = True,
    ) -> None:
        """
        Real potentials alpha per region with d alpha = omega; the connection form is -i alpha and
        holonomy around a loop is exp(i * loop integral of alpha).

        :param potentials: region name -> potential 1-form, every region covers the whole chart
        :param transitions: (source, target) -> w with alpha_target - alpha_source = dw
        :param cuts: periodic discontinuities of single-region potentials, at most one per axis, see Pq_Periodic_Cut
        :param poles: region name -> z value of the pole at which its dtheta coefficients must vanish
        """
        if not potentials:
            raise ContractError("a connection needs at least one region")
        self.base = base
        self.potentials = dict(potentials)
        self.transitions = dict(transitions or {})
        self.cuts = tuple(cuts)
        self.poles = dict(poles or {})
        self.is_hermitian = is_hermitian
        self.name = name or "connection"
        self.curvature_tol = curvature_tol
        self.fd_step = fd_step
        self.samples = samples
        self.seed = seed
        self.is_check_poles = is_check_poles
        self.is_check_integrality = is_check_integrality

        for region, alpha in self.potentials.items():
            if alpha.chart != base.chart:
                raise ChartMismatchError(f"potential of region {region} lives on {alpha.chart.name}, not {base.chart.name}")
            if alpha.degree != 1:
                raise ContractError(f"potential of region {region} has degree {alpha.degree}")
            if is_hermitian and alpha.reality != "real":
                raise HermitianViolationError(f"hermitian connections need real potentials, region {region} is {alpha.reality}")
        for src, dst in self.transitions:
            if src not in self.potentials or dst not in self.potentials:
                raise UnknownRegionError(f"transition {src}->{dst} refers to an unknown region")
        axes = [cut.axis for cut in self.cuts]
        if len(set(axes)) != len(axes):
            raise ContractError(f"at most one periodic cut per axis, got axes {axes}")

        self.curvature_residual = self.check_curvature()
        self.overlap_residual = self.check_overlaps()
        if is_check_poles:
            for region, pole in self.poles.items():
                self.potentials[region].check_pole_decay(pole)
        if is_check_integrality and self.chart.is_closed_surface and not base.is_degenerate:
            integral = base.total_integral()
            if distance_to_lattice(integral, TWO_PI) > INTEGRALITY_TOLERANCE:
                raise NonIntegralClassError(integral)
        logging.debug(
            f"Connection {self.name}: regions {self.regions}, curvature residual {self.curvature_residual:.3e}"
        )

    def __repr__(self) -> str:
        return f"Pq_Prequantum_Connection({self.name}, {self.chart.name}, regions={self.regions})"

    @property
    def chart(self) -> Pq_Chart:
        return self.base.chart

    @property
    def regions(self) -> tuple[str, ...]:
        return tuple(self.potentials)

    @property
    def default_region(self) -> str | None:
        return self.regions[0] if len(self.regions) == 1 else None

    def potential(self, region: str) -> Pq_Differential_Form:
        try:
            return self.potentials[region]
        except KeyError:
            raise UnknownRegionError(f"{self.name} has no region {region!r}, known: {self.regions}") from None

    def _sample(self) -> np.ndarray:
        return self.chart.sample(self.samples, np.random.default_rng(self.seed))

    def check_curvature(self) -> float:
        pts = self._sample()
        residual = 0.0
        for region in self.regions:
            residual = max(residual, (curvature(self, region) - self.base.form).sup_norm(pts))
        if residual > self.curvature_tol:
            raise CurvatureMismatchError(residual, self.curvature_tol)
        return residual

    def check_overlaps(self) -> float:
        pts = self._sample()
        residual = 0.0
        for (src, dst), phase in self.transitions.items():
            gap = np.real(self.potentials[dst].components(pts, is_validate=False)) - np.real(
                self.potentials[src].components(pts, is_validate=False)
            )
            residual = max(residual, float(np.max(np.abs(gap - central_difference(phase, pts)))))
        if residual > OVERLAP_TOLERANCE:
            raise ContractError(f"transition phases do not match the potentials on the overlap: {residual:.3e}")
        return residual

    def transition_phase(self, src: str, dst: str, pts) -> np.ndarray:
        if src == dst:
            return np.zeros(np.atleast_2d(pts).shape[0])
        try:
            phase = self.transitions[(src, dst)]
        except KeyError:
            raise RegionScheduleError(f"{self.name} has no transition from {src} to {dst}") from None
        return np.asarray(phase(np.atleast_2d(np.asarray(pts, dtype=float))), dtype=float)

    def with_potentials(
        self,
        potentials: Mapping[str, Pq_Differential_Form],
        *,
        base: Pq_Symplectic_Form | None = None,
        name: str = "",
        **kwargs,
    ) -> "Pq_Prequantum_Connection":
        """Same transitions, cuts and checks over new potentials, and optionally a new curvature form."""
        options: dict[str, Any] = dict(
            transitions=self.transitions,
            cuts=self.cuts,
            poles=self.poles,
            is_hermitian=self.is_hermitian,
            curvature_tol=self.curvature_tol,
            fd_step=self.fd_step,
            samples=self.samples,
            seed=self.seed,
            is_check_poles=self.is_check_poles,
            is_check_integrality=self.is_check_integrality,
        )
        options.update(kwargs)
        return Pq_Prequantum_Connection(base or self.base, potentials, name=name or self.name, **options)

    def shifted(self, form: Pq_Differential_Form, *, name: str = "") -> "Pq_Prequantum_Connection":
        """Every potential plus the same closed 1-form."""
        return self.with_potentials(
            {region: alpha + form for region, alpha in self.potentials.items()},
            name=name or f"{self.name}+{form.name}",
        )


# > Model connections
def sphere_monopole(k: int = 1, chart: Pq_Chart = SPHERE_CYL) -> Pq_Prequantum_Connection:
    """
    Charge-k monopole on omega = k dz^dtheta: alpha_N = k (z - 1) dtheta, alpha_S = k (z + 1) dtheta,
    switching N -> S multiplies by exp(2 i k theta).
    """
    itheta, iz = chart.index("theta"), chart.index("z")
    z = Pq_Scalar_Field.coordinate(iz, name="z")

    def potential(shift: float, name: str) -> Pq_Differential_Form:
        components: list[Pq_Scalar_Field | None] = [None, None]
        components[itheta] = (z + shift).scale(k)
        return Pq_Differential_Form.one_form(chart, components, name=name)

    def north_to_south(pts: np.ndarray) -> np.ndarray:
        return 2 * k * pts[:, itheta]

    def south_to_north(pts: np.ndarray) -> np.ndarray:
        return -2 * k * pts[:, itheta]

    return Pq_Prequantum_Connection(
        Pq_Symplectic_Form.area(chart, k, name=f"{k}*dz^dtheta"),
        {"N": potential(-1.0, f"{k}(z-1)dtheta"), "S": potential(1.0, f"{k}(z+1)dtheta")},
        transitions={("N", "S"): north_to_south, ("S", "N"): south_to_north},
        poles={"N": 1.0, "S": -1.0},
        name=f"monopole(k={k})",
    )


def torus_connection(k: int = 1, c: float = 0.0, chart: Pq_Chart = TORUS) -> Pq_Prequantum_Connection:
    """
    Degree-k connection on omega = (k / 2pi) dtheta1^dtheta2 with potential
    (k / 2pi) theta1 dtheta2 + c dtheta1 on the fundamental domain theta1 in [0, 2pi).

    k = 0 gives the flat connection c dtheta1 on the unchecked zero form.
    """
    i1, i2 = chart.index("theta1"), chart.index("theta2")
    lo, hi = chart.bounds[i1]
    period = hi - lo
    density = k / period

    def reduced(pts: np.ndarray) -> np.ndarray:
        return density * (lo + np.mod(pts[:, i1] - lo, period))

    def reduced_gradient(pts: np.ndarray) -> np.ndarray:
        grad = np.zeros(pts.shape)
        grad[:, i1] = density
        return grad

    components: list[Pq_Scalar_Field | None] = [None, None]
    if k:
        components[i2] = Pq_Scalar_Field(reduced, gradient=reduced_gradient, name=f"({k}/2pi)theta1")
    if c:
        components[i1] = Pq_Scalar_Field.constant(float(c), name=f"{c}")
    alpha = Pq_Differential_Form.one_form(chart, components, name=f"torus(k={k},c={c})")

    if k:
        base = Pq_Symplectic_Form.area(chart, density, name=f"({k}/2pi)dtheta1^dtheta2")

        def crossing(pts: np.ndarray) -> np.ndarray:
            return -k * pts[:, i2]

        cuts: tuple[Pq_Periodic_Cut, ...] = (Pq_Periodic_Cut(i1, crossing),)
    else:
        base = Pq_Symplectic_Form.degenerate(Pq_Differential_Form.zero(chart, 2))
        cuts = ()
    return Pq_Prequantum_Connection(base, {"U": alpha}, cuts=cuts, name=f"torus(k={k},c={c})")


def torus4_connection(k: int = 1, c: float = 0.0, chart: Pq_Chart = TORUS4) -> Pq_Prequantum_Connection:
    """
    Degree-k connection on (k / 2pi)(dtheta1^dtheta2 + dtheta3^dtheta4) with potential
    (k / 2pi)(theta1 dtheta2 + theta3 dtheta4) + c dtheta1, cut where theta1 and theta3 wrap.
    """
    if not k:
        raise ContractError("the product torus connection needs a nonzero degree")
    pairs = [(chart.index("theta1"), chart.index("theta2")), (chart.index("theta3"), chart.index("theta4"))]
    density = k / TWO_PI
    components: list[Pq_Scalar_Field | None] = [None] * chart.dim
    area: dict[tuple[int, ...], Pq_Scalar_Field] = {}
    cuts = []
    for angle, partner in pairs:
        lo, hi = chart.bounds[angle]

        def reduced(pts: np.ndarray, angle=angle, lo=lo, hi=hi) -> np.ndarray:
            return density * (lo + np.mod(pts[:, angle] - lo, hi - lo))

        def reduced_gradient(pts: np.ndarray, angle=angle) -> np.ndarray:
            grad = np.zeros(pts.shape)
            grad[:, angle] = density
            return grad

        def crossing(pts: np.ndarray, partner=partner) -> np.ndarray:
            return -k * pts[:, partner]

        components[partner] = Pq_Scalar_Field(
            reduced, gradient=reduced_gradient, name=f"({k}/2pi){chart.coord_names[angle]}"
        )
        area[(angle, partner)] = Pq_Scalar_Field.constant(density)
        cuts.append(Pq_Periodic_Cut(angle, crossing))
    if c:
        components[pairs[0][0]] = Pq_Scalar_Field.constant(float(c), name=f"{c}")
    alpha = Pq_Differential_Form.one_form(chart, components, name=f"torus4(k={k},c={c})")
    base = Pq_Symplectic_Form(Pq_Differential_Form(chart, 2, area, name=f"({k}/2pi)(dtheta1^dtheta2+dtheta3^dtheta4)"))
    return Pq_Prequantum_Connection(base, {"U": alpha}, cuts=cuts, name=f"torus4(k={k},c={c})")


def disk_standard(chart: Pq_Chart = DISK) -> Pq_Prequantum_Connection:
    """alpha = (x dy - y dx) / 2 on dx^dy."""
    x = Pq_Scalar_Field.coordinate(0, name="x")
    y = Pq_Scalar_Field.coordinate(1, name="y")
    alpha = Pq_Differential_Form.one_form(chart, [y.scale(-0.5), x.scale(0.5)], name="(xdy-ydx)/2")
    return Pq_Prequantum_Connection(Pq_Symplectic_Form.standard(chart), {"U": alpha}, name="disk_standard")


def disk_from_form(omega: Pq_Symplectic_Form, name: str = "") -> Pq_Prequantum_Connection:
    """Connection whose potential is the radial homotopy primitive of omega."""
    alpha = poincare_primitive(omega.form)
    return Pq_Prequantum_Connection(omega, {"U": alpha}, name=name or f"disk({omega.form.name})")


def flat_connection(chart: Pq_Chart, potential: Pq_Differential_Form | None = None) -> Pq_Prequantum_Connection:
    """Closed potential (zero by default) over the unchecked zero form."""
    alpha = potential if potential is not None else Pq_Differential_Form.zero(chart, 1)
    base = Pq_Symplectic_Form.degenerate(Pq_Differential_Form.zero(chart, 2))
    return Pq_Prequantum_Connection(base, {"U": alpha}, name=f"flat({alpha.name})", is_hermitian=alpha.reality == "real")


# > Curvature and holonomy
def curvature(conn: Pq_Prequantum_Connection, region: str) -> Pq_Differential_Form:
    return exterior_derivative(conn.potential(region), conn.fd_step)


def _schedule(conn: Pq_Prequantum_Connection, path: Pq_Path):
    if path.region_schedule is not None:
        for entry in path.region_schedule:
            conn.potential(entry.region)
        return path.region_schedule
    region = conn.default_region
    if region is None:
        raise RegionScheduleError(f"{path.name} has no region schedule and {conn.name} has regions {conn.regions}")
    return path.schedule_or(region)


def cut_crossings(cut: Pq_Periodic_Cut, chart: Pq_Chart, path: Pq_Path, s0: float, s1: float) -> list[tuple[float, int]]:
    """Parameters in [s0, s1] where the path crosses the cut, with +1 for increasing and -1 for decreasing crossings."""
    lo, hi = chart.bounds[cut.axis]
    period = hi - lo
    s = np.linspace(s0, s1, CUT_SCAN_POINTS)
    x = path(s)[:, cut.axis]
    sheet = np.floor((x - lo) / period).astype(int)
    crossings = []
    for i in np.nonzero(np.diff(sheet))[0]:
        a, b = sheet[i], sheet[i + 1]
        for level in range(min(a, b) + 1, max(a, b) + 1):
            target = lo + period * level

            def offset(u: float, target=target) -> float:
                return float(path(u)[0, cut.axis] - target)

            root = s[i + 1] if offset(s[i + 1]) == 0.0 else brentq(offset, s[i], s[i + 1], xtol=1e-14)
            crossings.append((float(root), 1 if b > a else -1))
    crossings.sort()
    logging.debug(f"{path.name}: {len(crossings)} cut crossings in [{s0}, {s1}]")
    return crossings


def holonomy_phase(
    conn: Pq_Prequantum_Connection,
    path: Pq_Path,
    *,
    gauss_order: int = GAUSS_ORDER,
    trapezoid_nodes: int = TRAPEZOID_NODES,
) -> complex:
    """Exponent of the holonomy: loop integral of the scheduled potentials plus transition and cut phases."""
    if path.chart != conn.chart:
        raise ChartMismatchError(f"{path.name} lives on {path.chart.name}, {conn.name} on {conn.chart.name}")
    if not path.is_closed:
        raise OpenPathError(f"holonomy needs a closed path, {path.name} is open")
    schedule = _schedule(conn, path)
    total = 0j
    for entry in schedule:
        alpha = conn.potential(entry.region)
        crossings = [
            (s, direction, cut)
            for cut in conn.cuts
            for s, direction in cut_crossings(cut, conn.chart, path, entry.start, entry.end)
        ]
        breaks = sorted({s for s, _, _ in crossings if entry.start < s < entry.end})
        total += path.line_integral(
            alpha, s0=entry.start, s1=entry.end, breaks=breaks, gauss_order=gauss_order, trapezoid_nodes=trapezoid_nodes
        )
        for s, direction, cut in crossings:
            total += direction * float(cut.phase(path(s))[0])
    for prev, cur in zip(schedule, schedule[1:]):
        total += float(conn.transition_phase(prev.region, cur.region, path(cur.start))[0])
    if schedule[-1].region != schedule[0].region:
        total += float(conn.transition_phase(schedule[-1].region, schedule[0].region, path(1.0))[0])
    return total


def holonomy(conn: Pq_Prequantum_Connection, path: Pq_Path, **quadrature) -> complex:
    """exp(i * loop integral of alpha), unitary for hermitian connections."""
    value = complex(np.exp(1j * holonomy_phase(conn, path, **quadrature)))
    if conn.is_hermitian and abs(abs(value) - 1.0) > 1e-9:
        raise HermitianViolationError(f"holonomy {value!r} of a hermitian connection is not unitary")
    return value


def holonomy_representation(conn: Pq_Prequantum_Connection, loops: Iterable[Pq_Path]) -> tuple[complex, ...]:
    return tuple(holonomy(conn, loop) for loop in loops)


def same_holonomy_representation(
    a: Pq_Prequantum_Connection, b: Pq_Prequantum_Connection, loops: Sequence[Pq_Path], tol: float = 1e-8
) -> bool:
    """Whether a and b have equal holonomy on each generator loop."""
    return all(
        abs(ha - hb) <= tol for ha, hb in zip(holonomy_representation(a, loops), holonomy_representation(b, loops))
    )


def pullback_connection(
    m: Pq_Smooth_Map,
    conn: Pq_Prequantum_Connection,
    *,
    curvature_tol: float | None = None,
) -> Pq_Prequantum_Connection:
    """
    m^* of the potentials, transition phases and base form. Maps without an analytic Jacobian are checked
    with a coarser step and tolerance.
    """
    if m.target != conn.chart:
        raise ChartMismatchError(f"{m!r} maps into {m.target.name}, {conn.name} lives on {conn.chart.name}")
    if m.is_identity:
        return conn
    if conn.cuts:
        raise RegionScheduleError(f"{conn.name} has a periodic cut, its crossings are not reconstructible under {m!r}")
    is_numeric = not m.has_jacobian
    if curvature_tol is None:
        curvature_tol = NUMERIC_PULLBACK_TOLERANCE if is_numeric else PULLBACK_TOLERANCE
    fd_step = NUMERIC_PULLBACK_FD_STEP if is_numeric else conn.fd_step

    def composed(phase: PhaseFunction) -> PhaseFunction:
        return lambda pts: phase(m(pts))

    base_form = pullback_form(m, conn.base.form)
    base = Pq_Symplectic_Form.degenerate(base_form) if conn.base.is_degenerate else Pq_Symplectic_Form(base_form)
    potentials = {region: pullback_form(m, alpha) for region, alpha in conn.potentials.items()}
    logging.debug(f"Pulling back {conn.name} by {m.name}, curvature tolerance {curvature_tol}")
    return Pq_Prequantum_Connection(
        base,
        potentials,
        transitions={key: composed(phase) for key, phase in conn.transitions.items()},
        poles=conn.poles,
        is_hermitian=conn.is_hermitian,
        name=f"{m.name}^*{conn.name}",
        curvature_tol=curvature_tol,
        fd_step=fd_step,
        samples=conn.samples,
        seed=conn.seed,
        is_check_poles=False,
        is_check_integrality=False,
    )

