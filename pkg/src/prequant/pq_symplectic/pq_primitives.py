#!/usr/bin/env python3

import logging
from itertools import combinations

import numpy as np
from numpy.polynomial import chebyshev

from prequant.pq_exceptions import (
    CohomologyObstructionError,
    DimensionMismatchError,
    DomainError,
    NotClosedError,
    NotStarShapedError,
)
from prequant.pq_geometry.pq_charts import Pq_Chart
from prequant.pq_geometry.pq_fields import Pq_Scalar_Field
from prequant.pq_geometry.pq_forms import Pq_Differential_Form, exterior_derivative, integrate_form
from prequant.pq_geometry.pq_quadrature import GAUSS_ORDER, RADIAL_NODES, TRAPEZOID_NODES, gauss_legendre

CLOSED_TOLERANCE = 1e-6
PRIMITIVE_TOLERANCE = 1e-6
COHOMOLOGY_TOLERANCE = 1e-8
CHEBYSHEV_DEGREE = 64
# Fourier modes below this fraction of sup |g| (at least 1) are dropped
MODE_CUTOFF = 1e-14


def form_residual(a: Pq_Differential_Form, b: Pq_Differential_Form, pts) -> float:
    """sup over pts of the coefficient-wise difference |a - b|."""
    if a.chart != b.chart or a.degree != b.degree:
        raise DimensionMismatchError(f"cannot compare {a!r} with {b!r}")
    return (a - b).sup_norm(pts)


class Pq_Primitive:
    def __init__(self, form: Pq_Differential_Form, target: Pq_Differential_Form, *, samples: int = 200, seed: int = 0) -> None:
        """
        A 1-form (or (k-1)-form) together with the sampled residual sup |d(form) - target|.

        :param target: the closed form this is a primitive of
        """
        self.form = form
        self.target = target
        pts = form.chart.sample(samples, np.random.default_rng(seed))
        if target.is_zero and form.is_zero:
            self.residual = 0.0
        else:
            self.residual = form_residual(exterior_derivative(form), target, pts)
        logging.debug(f"Primitive {form.name}: residual {self.residual:.3e}")

    def __repr__(self) -> str:
        return f"Pq_Primitive({self.form.name}, residual={self.residual:.3e})"

    def is_valid(self, tol: float = PRIMITIVE_TOLERANCE) -> bool:
        return self.residual <= tol


def check_closed(f: Pq_Differential_Form, *, tol: float = CLOSED_TOLERANCE, samples: int = 200, seed: int = 0) -> float:
    if f.degree >= f.chart.dim or f.is_zero:
        return 0.0
    pts = f.chart.sample(samples, np.random.default_rng(seed))
    residual = exterior_derivative(f).sup_norm(pts)
    if residual > tol:
        raise NotClosedError(f"{f.name or 'form'} is not closed: sup |df| = {residual:.3e}")
    return residual


class _Radial_Homotopy:
    """Coefficients of the radial homotopy operator applied to f, computed together for all multi-indices."""

    def __init__(self, f: Pq_Differential_Form, nodes: int) -> None:
        self.f = f
        self.t, self.w = gauss_legendre(nodes, 0.0, 1.0)
        self._cache_key: bytes | None = None
        self._cache_value: np.ndarray | None = None

    def tensor(self, pts: np.ndarray) -> np.ndarray:
        key = pts.tobytes()
        if key != self._cache_key:
            self._cache_key, self._cache_value = key, self._compute(pts)
        assert self._cache_value is not None
        return self._cache_value

    def _compute(self, pts: np.ndarray) -> np.ndarray:
        n, dim = pts.shape
        k = self.f.degree
        scaled = (self.t[:, None, None] * pts[None, :, :]).reshape(-1, dim)
        dense = self.f.dense(scaled, is_validate=False).reshape((len(self.t), n) + (dim,) * k)
        # iota_x in the first slot, with x the base point rather than t * x
        contracted = np.einsum("qni...,ni->qn...", dense, pts)
        weights = self.w * self.t ** (k - 1)
        return np.tensordot(weights, contracted, axes=(0, 0))


def poincare_primitive(
    f: Pq_Differential_Form,
    *,
    nodes: int = RADIAL_NODES,
    closed_tol: float = CLOSED_TOLERANCE,
) -> Pq_Differential_Form:
    """
    (K f)(x) = int_0^1 t^(k-1) (iota_x f)(t x) dt on a chart star-shaped about the origin.

    dK f = f for closed f of degree k >= 1, K f is smooth at the origin.
    """
    chart = f.chart
    if not chart.is_star_shaped:
        raise NotStarShapedError(f"{chart.name} is not star-shaped about the origin")
    if f.degree == 0:
        raise DimensionMismatchError("the radial homotopy needs a form of degree >= 1")
    check_closed(f, tol=closed_tol)
    if f.is_zero:
        return Pq_Differential_Form.zero(chart, f.degree - 1)

    homotopy = _Radial_Homotopy(f, nodes)
    coefficients = {}
    for idx in combinations(range(chart.dim), f.degree - 1):

        def evaluator(pts: np.ndarray, idx=idx) -> np.ndarray:
            return homotopy.tensor(pts)[(slice(None),) + idx]

        coefficients[idx] = Pq_Scalar_Field(evaluator, reality=f.reality, name=f"K{idx}")
    logging.debug(f"Poincare primitive of {f.name or 'form'} with {nodes} radial nodes")
    return Pq_Differential_Form(chart, f.degree - 1, coefficients, name=f"K({f.name})")


def _chebyshev_fit(z: np.ndarray, values: np.ndarray, degree: int) -> np.ndarray:
    return chebyshev.chebfit(z, values, degree)


def _trim_rows(coef: np.ndarray, cutoff: float) -> np.ndarray:
    """Drop trailing Chebyshev coefficients below cutoff, keeping at least the constant term."""
    magnitude = np.abs(coef.reshape(coef.shape[0], -1))
    rows = np.nonzero(np.max(magnitude, axis=1, initial=0.0) > cutoff)[0]
    return coef[: rows[-1] + 1 if rows.size else 1]


def sphere_fiber_primitive(
    f: Pq_Differential_Form,
    *,
    trapezoid_nodes: int = TRAPEZOID_NODES,
    degree: int = CHEBYSHEV_DEGREE,
    cohomology_tol: float = COHOMOLOGY_TOLERANCE,
) -> Pq_Differential_Form:
    """
    Primitive G dtheta + H dz of g dtheta^dz on the cylindrical sphere chart.

    The theta-mean of g is integrated in z from the south pole, so G vanishes at both poles when the
    total integral is zero. The oscillating part is integrated in theta mode by mode. Both are
    represented by Chebyshev series in z, which also give the analytic gradients.
    """
    chart = f.chart
    itheta, iz = chart.index("theta"), chart.index("z")
    if f.degree != 2 or chart.dim != 2:
        raise DimensionMismatchError(f"expected a 2-form on a surface, got degree {f.degree} on {chart.name}")
    total = integrate_form(f, chart.total_region(), GAUSS_ORDER, trapezoid_nodes)
    if abs(total) > cohomology_tol:
        raise CohomologyObstructionError(total)
    if f.is_zero:
        return Pq_Differential_Form.zero(chart, 1)

    g_field = f.coefficient((itheta, iz))
    theta = 2 * np.pi * np.arange(trapezoid_nodes) / trapezoid_nodes
    z = chebyshev.chebpts1(degree + 1)
    grid = np.zeros((trapezoid_nodes, z.size, 2))
    grid[..., itheta] = theta[:, None]
    grid[..., iz] = z[None, :]
    g = np.real(g_field(grid.reshape(-1, 2))).reshape(trapezoid_nodes, z.size)

    spectrum = np.fft.rfft(g, axis=0) / trapezoid_nodes
    modes = np.arange(1, (trapezoid_nodes + 1) // 2)
    mean_coef = _chebyshev_fit(z, spectrum[0].real, degree)
    cos_coef = _chebyshev_fit(z, 2 * spectrum[modes].real.T, degree)
    sin_coef = _chebyshev_fit(z, -2 * spectrum[modes].imag.T, degree)

    scale = max(np.max(np.abs(g)), 1.0)
    keep = np.max(np.abs(cos_coef) + np.abs(sin_coef), axis=0) > MODE_CUTOFF * scale
    modes, cos_coef, sin_coef = modes[keep], cos_coef[:, keep], sin_coef[:, keep]
    mean_coef = _trim_rows(mean_coef, MODE_CUTOFF * scale)
    cos_coef = _trim_rows(cos_coef, MODE_CUTOFF * scale)
    sin_coef = _trim_rows(sin_coef, MODE_CUTOFF * scale)
    logging.debug(f"Sphere fiber primitive: {modes.size} oscillating modes kept, Chebyshev degree {degree}")

    # G0(z) = -int_{-1}^z mean
    g0_coef = -chebyshev.chebint(mean_coef, lbnd=-1)
    g0_der = chebyshev.chebder(g0_coef)
    cos_der = chebyshev.chebder(cos_coef) if modes.size else cos_coef
    sin_der = chebyshev.chebder(sin_coef) if modes.size else sin_coef

    def g_eval(pts: np.ndarray) -> np.ndarray:
        return chebyshev.chebval(pts[:, iz], g0_coef)

    def g_grad(pts: np.ndarray) -> np.ndarray:
        grad = np.zeros(pts.shape)
        grad[:, iz] = chebyshev.chebval(pts[:, iz], g0_der)
        return grad

    def h_parts(pts: np.ndarray, a_coef: np.ndarray, b_coef: np.ndarray):
        th = pts[:, itheta][None, :] * modes[:, None]
        a = chebyshev.chebval(pts[:, iz], a_coef)
        b = chebyshev.chebval(pts[:, iz], b_coef)
        return th, a, b

    # g~ = sum a_m cos(m theta) + b_m sin(m theta)  =>  H = sum (a_m sin - b_m cos) / m
    def h_eval(pts: np.ndarray) -> np.ndarray:
        if not modes.size:
            return np.zeros(pts.shape[0])
        th, a, b = h_parts(pts, cos_coef, sin_coef)
        return np.sum((a * np.sin(th) - b * np.cos(th)) / modes[:, None], axis=0)

    def h_grad(pts: np.ndarray) -> np.ndarray:
        grad = np.zeros(pts.shape)
        if not modes.size:
            return grad
        th, a, b = h_parts(pts, cos_coef, sin_coef)
        grad[:, itheta] = np.sum(a * np.cos(th) + b * np.sin(th), axis=0)
        _, da, db = h_parts(pts, cos_der, sin_der)
        grad[:, iz] = np.sum((da * np.sin(th) - db * np.cos(th)) / modes[:, None], axis=0)
        return grad

    components: list[Pq_Scalar_Field | None] = [None, None]
    components[itheta] = Pq_Scalar_Field(g_eval, gradient=g_grad, name="G")
    components[iz] = Pq_Scalar_Field(h_eval, gradient=h_grad, name="H")
    return Pq_Differential_Form.one_form(chart, components, name=f"fiber_primitive({f.name})")


def primitive_for_difference(
    omega0: Pq_Differential_Form,
    omega1: Pq_Differential_Form,
    *,
    samples: int = 200,
) -> Pq_Primitive:
    """Primitive of omega1 - omega0 by the construction suited to the chart."""
    diff = omega1 - omega0
    chart: Pq_Chart = diff.chart
    if chart.is_star_shaped:
        alpha = poincare_primitive(diff)
    elif chart.genus == 0 and "theta" in chart.coord_names and "z" in chart.coord_names:
        alpha = sphere_fiber_primitive(diff)
    elif chart.genus is not None and chart.genus > 0:
        raise DomainError(f"{chart.name} has nontrivial first cohomology, no canonical primitive is constructed")
    else:
        raise NotStarShapedError(f"no primitive construction for {chart.name}")
    return Pq_Primitive(alpha, diff, samples=samples)
