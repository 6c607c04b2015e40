#!/usr/bin/env python3

import logging
import math
import time
from collections.abc import Callable, Sequence
from typing import NamedTuple

import numpy as np

from prequant.pq_bundle.pq_connection import (
    Pq_Prequantum_Connection,
    disk_from_form,
    disk_standard,
    flat_connection,
    holonomy,
    holonomy_representation,
    pullback_connection,
    sphere_monopole,
    torus4_connection,
    torus_connection,
)
from prequant.pq_bundle.pq_gauge import (
    Pq_Connection_Difference,
    Pq_Gauge_Function,
    apply_gauge,
    circle_map,
    connection_difference,
    default_probe_loops,
    integrate_along,
    path_families,
    periods,
    recover_gauge,
)
from prequant.pq_exceptions import (
    H1ObstructionError,
    IndependenceFailureError,
    NonIntegralClassError,
    NonIntegralPeriodError,
    ShrinkRadiusError,
    UnknownScenarioError,
)
from prequant.pq_geometry.pq_charts import CIRCLE, DISK, SPHERE_CYL, TORUS, Pq_Chart, disk_chart, rectangle_chart
from prequant.pq_geometry.pq_fields import Pq_Scalar_Field
from prequant.pq_geometry.pq_forms import Pq_Differential_Form, exterior_derivative, integrate_form, pullback_form
from prequant.pq_geometry.pq_paths import Pq_Path
from prequant.pq_geometry.pq_quadrature import Pq_Region
from prequant.pq_quantization.pq_bohr_sommerfeld import (
    bs_spectrum,
    independence_experiment,
    integral_leaf_agreement,
    phase_scan,
    random_sphere_potentials,
    riemann_roch_surface,
    sphere_trig_potential,
    torus_counterexample,
)
from prequant.pq_quantization.pq_fibration import sphere_height_fibration, torus4_fibration, torus_linear_fibration
from prequant.pq_scenarios.pq_report import Pq_Report
from prequant.pq_settings.pq_settings import Pq_Settings
from prequant.pq_symplectic.pq_averaging import average_over_circle, invariance_residual, rotation_action
from prequant.pq_symplectic.pq_linear import Pq_Symplectic_Form
from prequant.pq_symplectic.pq_moser import (
    Pq_Moser_Path,
    darboux_chart,
    flow_convergence,
    invertibility_residual,
    moser_flow,
    primitive_for_path,
    pullback_residual,
)
from prequant.pq_symplectic.pq_primitives import form_residual
from prequant.pq_utils import TWO_PI, distance_to_lattice, sup_norm, wrap_phase

# Smallest ball radius the Darboux scenario retries with after an escape
MIN_DARBOUX_RADIUS = 0.05

Runner = Callable[[Pq_Settings, Pq_Report], None]


class Pq_Scenario(NamedTuple):
    name: str
    description: str
    runner: Runner
    # settings sections recorded as report parameters besides run, quadrature and tolerance
    sections: tuple[str, ...]


def _rng(settings: Pq_Settings, stream: int = 0) -> np.random.Generator:
    return np.random.default_rng([settings["run.seed"], stream])


def _wrapped_distance(a: np.ndarray, b: np.ndarray, chart: Pq_Chart) -> float:
    """sup distance of point sets, periodic coordinates compared modulo their period."""
    diff = a - b
    for i, period in enumerate(chart.periods):
        if period is not None:
            diff[:, i] = wrap_phase(diff[:, i] * TWO_PI / period) * period / TWO_PI
    return sup_norm(diff)


def _level_deviation(found: Sequence[float], expected: Sequence[float]) -> float:
    if len(found) != len(expected):
        return math.inf
    return max((abs(a - b) for a, b in zip(sorted(found), sorted(expected))), default=0.0)


def _missing_distance(old: Sequence[float], new: Sequence[float]) -> float:
    """Largest distance from an old level to its nearest new level, inf when one has vanished."""
    if not old:
        return 0.0
    if not new:
        return math.inf
    new_arr = np.asarray(new)
    return max(float(np.min(np.abs(new_arr - level))) for level in old)


def _gauge_checks(
    report: Pq_Report,
    settings: Pq_Settings,
    xi: Pq_Connection_Difference,
    gauge: Pq_Gauge_Function,
    pts: np.ndarray,
    prefix: str,
) -> None:
    report.add_check(f"{prefix}gauge_residual", gauge.gauge_residual(xi, pts), settings["tolerance.gauge"])
    report.add_check(
        f"{prefix}hermitian_real_part", sup_norm(np.real(gauge(pts))), settings["tolerance.hermitian"]
    )


def _path_family_gap(xi: Pq_Connection_Difference, basepoint, pts: np.ndarray) -> float:
    primary, secondary = path_families(xi.chart)
    first = integrate_along(xi.xi, primary, np.asarray(basepoint, dtype=float), pts)
    second = integrate_along(xi.xi, secondary, np.asarray(basepoint, dtype=float), pts)
    return sup_norm(first - second)


def _sphere_area(density: Pq_Scalar_Field | float, name: str) -> Pq_Symplectic_Form:
    """density * dz^dtheta on the cylindrical sphere chart."""
    coefficient = density.scale(SPHERE_CYL.orientation) if isinstance(density, Pq_Scalar_Field) else density * SPHERE_CYL.orientation
    return Pq_Symplectic_Form(Pq_Differential_Form.top(SPHERE_CYL, coefficient, name=name))


def _legendre_density(epsilon: float) -> Pq_Scalar_Field:
    """1 + eps (3z^2 - 1)/2, whose difference from 1 has zero total area."""
    z = Pq_Scalar_Field.coordinate(SPHERE_CYL.index("z"), name="z")
    density = (z * z).scale(1.5 * epsilon) + (1.0 - 0.5 * epsilon)
    density.name = f"1+{epsilon}(3z^2-1)/2"
    return density


# > darboux-local
def run_darboux_local(settings: Pq_Settings, report: Pq_Report) -> None:
    """Darboux chart for a nonconstant area form on the disk and the gauge relating the pulled connection to the standard one."""
    epsilon = settings["darboux.epsilon"]
    center = np.asarray(settings["darboux.center"], dtype=float)
    samples = settings["darboux.samples"]
    seed = settings["run.seed"]
    x = Pq_Scalar_Field.coordinate(0, name="x")
    density = x.scale(epsilon) + 1.0
    omega = Pq_Symplectic_Form(Pq_Differential_Form.top(DISK, density, name=f"(1+{epsilon}x)dx^dy"))

    radius = settings["darboux.radius"]
    while True:
        try:
            psi = darboux_chart(omega, center, radius, steps=settings["darboux.steps"], samples=samples, seed=seed)
            break
        except ShrinkRadiusError as e:
            if e.suggested_radius < MIN_DARBOUX_RADIUS:
                raise
            logging.warning(f"{e}, retrying")
            radius = e.suggested_radius
    ball = psi.source
    report.parameters["darboux.used_radius"] = repr(float(radius))

    pts = ball.sample(samples, _rng(settings))
    residual = (pullback_form(psi, omega.form) - Pq_Differential_Form.standard_symplectic(ball)).sup_norm(pts)
    report.add_check("darboux_pullback", residual, settings["tolerance.pullback"])
    report.add_check("darboux_center", sup_norm(psi(np.zeros((1, 2)))[0] - center), settings["tolerance.identity"])

    pulled = pullback_connection(psi, disk_from_form(omega))
    standard = disk_standard(ball)
    xi = connection_difference(standard, pulled, base_tol=settings["tolerance.pullback"])
    gauge = recover_gauge(xi, (0.0, 0.0), seed=seed)
    _gauge_checks(report, settings, xi, gauge, pts, "darboux_")


# > moser-sphere
def run_moser_sphere(settings: Pq_Settings, report: Pq_Report) -> None:
    """Moser flow from dz^dtheta to (1 + eps (3z^2-1)/2) dz^dtheta and the gauge between the pulled monopole and the original."""
    epsilon = settings["moser.epsilon"]
    steps = settings["moser.steps"]
    samples = settings["run.samples"]
    seed = settings["run.seed"]
    omega0 = _sphere_area(1.0, "dz^dtheta")
    omega1 = _sphere_area(_legendre_density(epsilon), f"(1+{epsilon}(3z^2-1)/2)dz^dtheta")
    path = Pq_Moser_Path(omega0, omega1, samples=samples, seed=seed)
    if epsilon == 0.0:
        alpha = Pq_Differential_Form.zero(SPHERE_CYL, 1)
    else:
        primitive = primitive_for_path(path, samples=samples)
        report.add_check("primitive_residual", primitive.residual, settings["tolerance.dd_analytic"])
        alpha = primitive.form

    pts = SPHERE_CYL.sample(samples, _rng(settings))
    flow = moser_flow(path, alpha, steps)
    tolerance = settings["tolerance.identity"] if epsilon == 0.0 else settings["tolerance.pullback"]
    report.add_check(f"pullback_residual[N={steps}]", pullback_residual(flow, omega0, omega1, pts), tolerance)

    convergence = flow_convergence(
        path, alpha, (steps, settings["moser.refined_steps"]), samples=samples, seed=seed
    )
    report.add_check(
        f"pullback_residual[N={settings['moser.refined_steps']}]", convergence.residuals[-1], tolerance
    )
    if convergence.is_converging:
        report.add_outcome("moser_convergence", True)
    else:
        # residuals at the finite-difference floor carry no rate
        report.add_outcome("convergence_at_fd_floor", convergence.is_at_floor)
    if epsilon != 0.0:
        coarse = flow_convergence(path, alpha, settings["moser.convergence_steps"], samples=samples, seed=seed)
        for (coarse_steps, fine_steps), ratio in zip(zip(coarse.steps, coarse.steps[1:]), coarse.ratios):
            report.add_check(
                f"convergence_ratio[N={coarse_steps}->{fine_steps}]", ratio, settings["tolerance.convergence_ratio"], ">="
            )
    report.add_check(
        "invertibility", invertibility_residual(path, alpha, steps, pts), settings["tolerance.invertibility"]
    )

    heights = np.linspace(-0.95, 0.95, 39)
    profile = flow(np.column_stack([np.zeros_like(heights), heights]))
    report.add_plot("flow_profile", heights, profile[:, SPHERE_CYL.index("z")], "z flowed_z")

    monopole = sphere_monopole(1)
    potentials = {region: form + alpha for region, form in monopole.potentials.items()}
    moved = monopole.with_potentials(potentials, base=omega1, name=f"monopole+alpha(eps={epsilon})")
    pulled = pullback_connection(flow, moved)
    xi = connection_difference(monopole, pulled, base_tol=settings["tolerance.pullback"])
    gauge = recover_gauge(xi, (0.0, 0.0), seed=seed)
    gauge_pts = SPHERE_CYL.sample(settings["moser.gauge_samples"], _rng(settings, 1))
    _gauge_checks(report, settings, xi, gauge, gauge_pts, "pulled_monopole_")


# > weinstein-rotation
def run_weinstein_rotation(settings: Pq_Settings, report: Pq_Report) -> None:
    """Equivariant Moser flow and gauge under the rotation action, after averaging a symmetry-breaking primitive."""
    epsilon = settings["weinstein.epsilon"]
    breaking = settings["weinstein.breaking"]
    elements = settings["weinstein.elements"]
    nodes = settings["weinstein.averaging_nodes"]
    samples = settings["weinstein.samples"]
    seed = settings["run.seed"]
    chart = SPHERE_CYL
    action = rotation_action(chart)
    pts = chart.sample(samples, _rng(settings))

    omega0 = _sphere_area(1.0, "dz^dtheta")
    omega1 = _sphere_area(_legendre_density(epsilon), f"(1+{epsilon}(3z^2-1)/2)dz^dtheta")
    path = Pq_Moser_Path(omega0, omega1, samples=settings["run.samples"], seed=seed)
    invariant = primitive_for_path(path, samples=settings["run.samples"]).form

    h = sphere_trig_potential([[[0.0], [breaking]], [[0.0], [0.0]]], chart, name=f"{breaking}(1-z^2)cos(theta)")
    raw = invariant + exterior_derivative(Pq_Differential_Form.function(chart, h))
    raw.name = "alpha+dh"
    report.add_check(
        "raw_primitive_breaks_symmetry",
        invariance_residual(action, raw, pts, elements),
        settings["tolerance.symmetry_breaking"],
        ">=",
    )
    averaged = average_over_circle(action, raw, nodes)
    report.add_check(
        "averaged_primitive_invariance", invariance_residual(action, averaged, pts, elements), settings["tolerance.invariance"]
    )
    report.add_check(
        "averaged_primitive_residual",
        form_residual(exterior_derivative(averaged), path.difference(), pts),
        settings["tolerance.dd_analytic"],
    )

    steps = settings["weinstein.steps"]
    flow = moser_flow(path, averaged, steps)
    raw_flow = moser_flow(path, raw, steps)
    images = flow(pts)
    raw_images = raw_flow(pts)
    equivariance, raw_equivariance = 0.0, 0.0
    for g in elements:
        rotate = action(g)
        rotated = chart.reduce(rotate(pts))
        equivariance = max(equivariance, _wrapped_distance(flow(rotated), rotate(images), chart))
        raw_equivariance = max(raw_equivariance, _wrapped_distance(raw_flow(rotated), rotate(raw_images), chart))
    report.add_check("flow_equivariance", equivariance, settings["tolerance.equivariance"])
    report.add_check(
        "raw_flow_breaks_equivariance", raw_equivariance, settings["tolerance.symmetry_breaking"], ">="
    )

    report.add_check(
        "raw_function_breaks_symmetry", invariance_residual(action, h, pts, elements), settings["tolerance.symmetry_breaking"], ">="
    )
    report.add_check(
        "averaged_function_invariance",
        invariance_residual(action, average_over_circle(action, h, nodes), pts, elements),
        settings["tolerance.invariance"],
    )

    monopole = sphere_monopole(1)
    psi = sphere_trig_potential([[[0.0, epsilon]], [[0.0, 0.0]]], chart, name=f"{epsilon}z(1-z^2)")
    shifted = apply_gauge(monopole, Pq_Gauge_Function.from_potential(psi, chart))
    xi = connection_difference(monopole, shifted)
    gauge = recover_gauge(xi, (0.0, 0.0), seed=seed).averaged(action, nodes)
    _gauge_checks(report, settings, xi, gauge, pts, "averaged_")
    report.add_check(
        "averaged_gauge_invariance", invariance_residual(action, gauge.phi, pts, elements), settings["tolerance.invariance"]
    )


# > gauge-necessity
def run_gauge_necessity(settings: Pq_Settings, report: Pq_Report) -> None:
    """
    Connections with equal curvature differ by a nonconstant gauge, and a rotated monopole differs from the
    original by a symplectomorphism followed by a gauge.
    """
    k = settings["gauge.k"]
    amplitude = settings["gauge.amplitude"]
    seed = settings["run.seed"]
    chart = SPHERE_CYL
    pts = chart.sample(settings["gauge.samples"], _rng(settings))
    basepoint = (0.0, 0.0)
    psi = sphere_trig_potential([[[0.0], [amplitude]], [[0.0], [0.0]]], chart, name=f"{amplitude}(1-z^2)cos(theta)")
    shift = Pq_Gauge_Function.from_potential(psi, chart, basepoint)

    trivial = flat_connection(chart)
    moved = apply_gauge(trivial, shift)
    report.add_check(
        "potentials_differ",
        (moved.potential("U") - trivial.potential("U")).sup_norm(pts),
        settings["tolerance.gauge"],
        ">=",
    )
    xi = connection_difference(trivial, moved)
    gauge = recover_gauge(xi, basepoint, seed=seed)
    _gauge_checks(report, settings, xi, gauge, pts, "")
    values = gauge(pts)
    report.add_check("gauge_nonconstant", float(np.var(np.imag(values))), 0.1, ">=")
    report.add_check("gauge_matches_potential", sup_norm(values - shift(pts)), settings["tolerance.gauge"])
    report.add_check("path_family_gap", _path_family_gap(xi, basepoint, pts), settings["tolerance.path"])

    monopole = sphere_monopole(k)
    gauged = apply_gauge(monopole, shift)
    loops = default_probe_loops(chart) + [
        Pq_Path.latitude(z, region="N" if z >= 0 else "S", chart=chart) for z in (-0.6, -0.2, 0.3, 0.7)
    ]
    gap = max(abs(a - b) for a, b in zip(holonomy_representation(monopole, loops), holonomy_representation(gauged, loops)))
    report.add_check("holonomy_gauge_invariance", gap, settings["tolerance.holonomy"])
    recovered = apply_gauge(monopole, recover_gauge(connection_difference(monopole, gauged), basepoint, seed=seed))
    report.add_check(
        "gauge_round_trip",
        max((recovered.potential(r) - gauged.potential(r)).sup_norm(pts) for r in monopole.regions),
        settings["tolerance.gauge"],
    )

    rotation = rotation_action(chart)(settings["weinstein.elements"][0])
    rotated = pullback_connection(rotation, gauged)
    xi_rotated = connection_difference(monopole, rotated)
    _gauge_checks(report, settings, xi_rotated, recover_gauge(xi_rotated, basepoint, seed=seed), pts, "rotated_")


# > torus-periods
def run_torus_periods(settings: Pq_Settings, report: Pq_Report) -> None:
    """Periods of c dtheta1 on the torus, the H1 obstruction, circle maps for integral c, the spectrum shift and 2-torus leaves."""
    c_values = settings["torus.c_values"]
    seed = settings["run.seed"]
    chart = TORUS
    loops = default_probe_loops(chart)
    pts = chart.sample(settings["gauge.samples"], _rng(settings))
    dtheta = Pq_Differential_Form.basis(CIRCLE, "theta")

    for c in c_values:
        form = Pq_Differential_Form.basis(chart, "theta1", coefficient=float(c))
        form.name = f"{c}dtheta1"
        xi = Pq_Connection_Difference.from_form(form, seed=seed)
        first, second = periods(xi, loops)
        report.add_check(
            f"period[c={c}]", abs(first - TWO_PI * c) + abs(second), settings["tolerance.period"]
        )

        try:
            recover_gauge(xi, (0.0, 0.0), seed=seed)
            is_obstructed = False
        except H1ObstructionError as e:
            logging.info(f"c = {c}: {e}")
            is_obstructed = True
        report.add_outcome(f"h1_obstruction[c={c}]", is_obstructed, abs(TWO_PI * c) > settings["tolerance.period"])

        is_integral = abs(c - round(c)) <= settings["tolerance.period"]
        try:
            t = circle_map(xi, (0.0, 0.0), seed=seed)
        except NonIntegralPeriodError as e:
            logging.info(f"c = {c}: {e}")
            report.add_outcome(f"circle_map[c={c}]", False, is_integral)
            continue
        report.add_outcome(f"circle_map[c={c}]", True, is_integral)
        report.add_check(
            f"circle_pullback[c={c}]", (pullback_form(t, dtheta) - form).sup_norm(pts), settings["tolerance.circle_pullback"]
        )

    fib = torus_linear_fibration(chart)
    conn = torus_connection(settings["torus.k"], chart=chart)
    counter = torus_counterexample(
        conn,
        fib,
        c_values,
        grid_step=settings["bs.grid_step"],
        root_tol=settings["tolerance.root"],
        tol=settings["tolerance.level"],
    )
    report.add_spectrum("torus_reference", counter.reference)
    for outcome in counter.outcomes:
        report.add_outcome(f"spectrum_changed[c={outcome.c}]", outcome.is_changed, outcome.is_expected_changed)
        report.add_spectrum(f"torus_c{outcome.c:g}", outcome.spectrum)
    scan = phase_scan(conn, fib, settings["bs.grid_step"])
    report.add_plot("phase_torus", scan.levels, scan.phases[:, 0], "theta2 unwrapped_holonomy_phase")

    if not settings["torus.k"]:
        return
    # 2-torus leaves of the product torus: the theta3 loop must be trivial as well
    product = torus4_connection(settings["torus.k"])
    for fixed in settings["torus.product_fixed"]:
        spectrum = bs_spectrum(product, torus4_fibration(fixed), settings["bs.grid_step"], settings["tolerance.root"])
        is_second_trivial = distance_to_lattice(settings["torus.k"] * fixed, TWO_PI) <= settings["tolerance.level"]
        expected = counter.reference.regular_levels if is_second_trivial else ()
        report.add_check(
            f"product_levels[theta4={fixed}]", _level_deviation(spectrum.regular_levels, expected), settings["tolerance.level"]
        )
        report.add_spectrum(f"torus4_theta4_{fixed:g}", spectrum)


# > bs-sphere
def run_bs_sphere(settings: Pq_Settings, report: Pq_Report) -> None:
    """Bohr-Sommerfeld levels of the height fibration for monopoles of charge k."""
    fib = sphere_height_fibration()
    grid_step = settings["bs.grid_step"]
    root_tol = settings["tolerance.root"]
    level_tol = settings["tolerance.level"]
    for k in settings["bs.k_values"]:
        conn = sphere_monopole(k)
        spectrum = bs_spectrum(conn, fib, grid_step, root_tol)
        expected = [1.0 - n / k for n in range(1, 2 * k)]
        report.add_check(f"levels[k={k}]", _level_deviation(spectrum.regular_levels, expected), level_tol)
        report.add_check(f"level_count[k={k}]", len(spectrum.regular_levels), len(expected), "==")
        report.add_check(f"holonomy_residual[k={k}]", max(spectrum.residuals, default=0.0), level_tol)
        refined = bs_spectrum(conn, fib, grid_step / 2, root_tol)
        report.add_check(
            f"refinement[k={k}]", _missing_distance(spectrum.regular_levels, refined.regular_levels), level_tol
        )
        report.add_spectrum(f"sphere_k{k}", spectrum)
        scan = phase_scan(conn, fib, grid_step)
        report.add_plot(f"phase_k{k}", scan.levels, scan.phases[:, 0], "z unwrapped_holonomy_phase")


# > bs-independence
def run_bs_independence(settings: Pq_Settings, report: Pq_Report) -> None:
    """The spectrum of the height fibration does not see exact shifts of the monopole potential."""
    k = settings["independence.k"]
    grid_step = settings["independence.grid_step"]
    level_tol = settings["tolerance.level"]
    chart = SPHERE_CYL
    fib = sphere_height_fibration(chart)
    conn = sphere_monopole(k, chart)
    scripted = sphere_trig_potential([[[0.0], [1.0]], [[0.0], [0.0]]], chart, name="(1-z^2)cos(theta)")
    perturbations = [scripted, Pq_Scalar_Field.zero()] + random_sphere_potentials(
        settings["independence.random"], chart, seed=settings["run.seed"]
    )
    try:
        experiment = independence_experiment(
            conn, fib, perturbations, grid_step=grid_step, root_tol=settings["tolerance.root"], tol=level_tol
        )
    except IndependenceFailureError as e:
        logging.error(f"{e}")
        report.add_outcome("independence", False)
        return
    report.add_outcome("independence", True)
    report.add_check("max_level_deviation", experiment.max_deviation, level_tol)
    report.add_spectrum("sphere_reference", experiment.reference)
    if experiment.spectra:
        report.add_spectrum("sphere_scripted_shift", experiment.spectra[0])

    shifted = apply_gauge(conn, Pq_Gauge_Function.from_potential(scripted, chart))
    levels = list(experiment.reference.regular_levels)
    probes = levels + [(a + b) / 2 for a, b in zip(levels, levels[1:])]
    report.add_outcome("integral_leaf_agreement", integral_leaf_agreement(conn, shifted, fib, probes))


# > riemann-roch
def run_riemann_roch(settings: Pq_Settings, report: Pq_Report) -> None:
    """Riemann-Roch numbers of prequantizable surfaces against Bohr-Sommerfeld level counts."""
    fib = sphere_height_fibration()
    for k in settings["riemann_roch.k_values"]:
        rr = riemann_roch_surface(_sphere_area(float(k), f"{k}dz^dtheta"), 0)
        report.add_check(f"riemann_roch[k={k}]", rr, 2 * k + 1, "==")
        spectrum = bs_spectrum(sphere_monopole(k), fib, settings["bs.grid_step"], settings["tolerance.root"])
        report.add_check(f"level_count[k={k}]", spectrum.count, rr, "==")

    torus_k = settings["riemann_roch.torus_k"]
    torus_form = Pq_Symplectic_Form.area(TORUS, torus_k / TWO_PI, name=f"({torus_k}/2pi)dtheta1^dtheta2")
    report.add_check(f"riemann_roch_torus[k={torus_k}]", riemann_roch_surface(torus_form, 1), torus_k, "==")

    try:
        riemann_roch_surface(_sphere_area(0.3, "0.3dz^dtheta"), 0)
        is_rejected = False
    except NonIntegralClassError as e:
        logging.info(f"{e}")
        is_rejected = True
    report.add_outcome("non_integral_class_rejected", is_rejected)


# > calculus-suite
def _random_trig_field(rng: np.random.Generator, dim: int, *, terms: int = 3, is_analytic: bool = True) -> Pq_Scalar_Field:
    """sum_j a_j sin(w_j . x + b_j)"""
    amplitudes = rng.normal(size=terms)
    frequencies = rng.normal(scale=2.0, size=(terms, dim))
    shifts = rng.uniform(0.0, TWO_PI, terms)

    def evaluator(pts: np.ndarray) -> np.ndarray:
        return np.sin(pts @ frequencies.T + shifts) @ amplitudes

    def gradient(pts: np.ndarray) -> np.ndarray:
        return (np.cos(pts @ frequencies.T + shifts) * amplitudes) @ frequencies

    return Pq_Scalar_Field(evaluator, gradient=gradient if is_analytic else None, name="trig")


def run_calculus_suite(settings: Pq_Settings, report: Pq_Report) -> None:
    """d o d, Stokes on rectangles and gauge invariance of holonomy on random data."""
    rng = _rng(settings)
    fd_step = settings["quadrature.fd_step"]
    order = settings["quadrature.gauss_order"]
    nodes = settings["quadrature.trapezoid_nodes"]
    n_points = settings["calculus.points"]

    numeric, analytic = 0.0, 0.0
    for _ in range(settings["calculus.fields"]):
        pts = DISK.sample(n_points, rng)
        for is_analytic in (False, True):
            f = Pq_Differential_Form.function(DISK, _random_trig_field(rng, 2, is_analytic=is_analytic))
            residual = exterior_derivative(exterior_derivative(f, fd_step), fd_step).sup_norm(pts)
            if is_analytic:
                analytic = max(analytic, residual)
            else:
                numeric = max(numeric, residual)
    ball = disk_chart(1.0, 4, name="disk4")
    for _ in range(max(1, settings["calculus.fields"] // 10)):
        beta = Pq_Differential_Form.one_form(ball, [_random_trig_field(rng, 4, is_analytic=False) for _ in range(4)])
        numeric = max(numeric, exterior_derivative(exterior_derivative(beta, fd_step), fd_step).sup_norm(ball.sample(n_points, rng)))
    report.add_check("dd_numeric", numeric, settings["tolerance.dd_numeric"])
    report.add_check("dd_analytic", analytic, settings["tolerance.dd_analytic"])

    box = rectangle_chart("box", ("x", "y"), ((-1.0, 1.0), (-1.0, 1.0)))
    stokes = 0.0
    for _ in range(settings["calculus.rectangles"]):
        (a, b), (c, d) = np.sort(rng.uniform(-1.0, 1.0, (2, 2)), axis=1)
        beta = Pq_Differential_Form.one_form(box, [_random_trig_field(rng, 2), _random_trig_field(rng, 2)])
        inside = integrate_form(exterior_derivative(beta), Pq_Region(box, ((a, b), (c, d))), order, nodes)
        boundary = integrate_form(beta, Pq_Path.rectangle(box, (a, b), (c, d)), order, nodes)
        stokes = max(stokes, abs(inside - boundary))
    report.add_check("stokes", stokes, settings["tolerance.stokes"])

    n_loops = settings["calculus.loops"]
    monopole = sphere_monopole(1)
    sphere_psi = random_sphere_potentials(1, SPHERE_CYL, seed=settings["run.seed"])[0]
    sphere_gauged = apply_gauge(monopole, Pq_Gauge_Function.from_potential(sphere_psi, SPHERE_CYL))
    disk_conn = disk_standard()
    disk_gauged = apply_gauge(disk_conn, Pq_Gauge_Function.from_potential(_random_trig_field(rng, 2), DISK))
    pairs: list[tuple[Pq_Prequantum_Connection, Pq_Prequantum_Connection, Pq_Path]] = []
    for z in rng.uniform(-0.9, 0.9, (n_loops + 1) // 2):
        pairs.append((monopole, sphere_gauged, Pq_Path.latitude(float(z), region="N" if z >= 0 else "S")))
    for _ in range(n_loops // 2):
        center = rng.uniform(-0.3, 0.3, 2)
        pairs.append((disk_conn, disk_gauged, Pq_Path.circle(DISK, center, float(rng.uniform(0.1, 0.5)))))
    gap = max(
        (
            abs(holonomy(a, loop, gauss_order=order, trapezoid_nodes=nodes) - holonomy(b, loop, gauss_order=order, trapezoid_nodes=nodes))
            for a, b, loop in pairs
        ),
        default=0.0,
    )
    report.add_check("holonomy_gauge_invariance", gap, settings["tolerance.holonomy"])

    report.add_check(
        "sphere_area", abs(_sphere_area(1.0, "dz^dtheta").total_integral(order, nodes) - 2 * TWO_PI), settings["tolerance.period"]
    )


SCENARIOS: dict[str, Pq_Scenario] = {
    scenario.name: scenario
    for scenario in (
        Pq_Scenario(
            "darboux-local",
            "Darboux chart for (1 + eps x) dx^dy on the disk and the gauge to the standard connection",
            run_darboux_local,
            ("darboux",),
        ),
        Pq_Scenario(
            "moser-sphere",
            "Moser flow between area forms of equal class on the sphere, convergence and pulled-back monopole",
            run_moser_sphere,
            ("moser",),
        ),
        Pq_Scenario(
            "weinstein-rotation",
            "Rotation-equivariant Moser flow and averaged gauge on the sphere",
            run_weinstein_rotation,
            ("weinstein",),
        ),
        Pq_Scenario(
            "gauge-necessity",
            "Equal-curvature connections differ by a nonconstant gauge, up to a symplectomorphism",
            run_gauge_necessity,
            ("gauge",),
        ),
        Pq_Scenario(
            "torus-periods",
            "Periods of c dtheta1 on the torus, H1 obstruction, circle maps, spectrum shifts and product torus leaves",
            run_torus_periods,
            ("torus", "bs"),
        ),
        Pq_Scenario(
            "bs-sphere",
            "Bohr-Sommerfeld levels of the height fibration for monopoles of charge k",
            run_bs_sphere,
            ("bs",),
        ),
        Pq_Scenario(
            "bs-independence",
            "Bohr-Sommerfeld spectrum under randomized exact shifts of the potential",
            run_bs_independence,
            ("independence",),
        ),
        Pq_Scenario(
            "riemann-roch",
            "Riemann-Roch numbers against Bohr-Sommerfeld level counts",
            run_riemann_roch,
            ("riemann_roch", "bs"),
        ),
        Pq_Scenario(
            "calculus-suite",
            "d o d, Stokes and holonomy gauge invariance on random data",
            run_calculus_suite,
            ("calculus",),
        ),
    )
}


def scenario_names() -> list[str]:
    return list(SCENARIOS)


def get_scenario(name: str) -> Pq_Scenario:
    try:
        return SCENARIOS[name]
    except KeyError:
        raise UnknownScenarioError(f"unknown scenario {name!r}, expected one of {', '.join(SCENARIOS)}") from None


def run_scenario(settings: Pq_Settings, name: str) -> Pq_Report:
    """Run one registered scenario; errors other than the expected outcomes it records propagate."""
    scenario = get_scenario(name)
    seed = settings["run.seed"]
    sections = ("run", "quadrature", "tolerance") + scenario.sections
    parameters = {
        key: value for key, value in settings.to_strings().items() if key.split(".", 1)[0] in sections
    }
    report = Pq_Report(scenario.name, seed=seed, parameters=parameters)
    logging.info(f"Running {scenario.name} with seed {seed}...")
    start = time.perf_counter()
    scenario.runner(settings, report)
    report.duration = time.perf_counter() - start
    failed = report.failed_checks()
    logging.info(
        f"{scenario.name}: {len(report.checks) - len(failed)}/{len(report.checks)} checks passed in {report.duration:.2f}s"
    )
    for check in failed:
        logging.warning(f"{scenario.name}: {check.name} = {check.residual!r}, expected {check.relation} {check.tolerance!r}")
    return report
