#!/usr/bin/env python3

import logging
from collections import OrderedDict
from collections.abc import Sequence
from typing import NamedTuple

import numpy as np

from prequant.pq_exceptions import (
    ChartEscapeError,
    ChartMismatchError,
    CohomologyObstructionError,
    DegenerateFormError,
    DomainError,
    ShrinkRadiusError,
)
from prequant.pq_geometry.pq_charts import Pq_Chart, Pq_Point, disk_chart
from prequant.pq_geometry.pq_fields import FD_STEP, Pq_Smooth_Map, as_points
from prequant.pq_geometry.pq_forms import Pq_Differential_Form, pullback_form
from prequant.pq_symplectic.pq_linear import NONDEGENERACY_TOLERANCE, Pq_Symplectic_Form, symplectic_frame
from prequant.pq_symplectic.pq_primitives import Pq_Primitive, primitive_for_difference

COHOMOLOGY_TOLERANCE = 1e-8
MOSER_STEPS = 200
# Residuals below this are treated as finite-difference noise in convergence checks
CONVERGENCE_FLOOR = 1e-9
CONVERGENCE_RATIO = 4.0
# Point sets whose images each flow map keeps
FLOW_CACHE_SIZE = 8


class Pq_Moser_Path:
    def __init__(
        self,
        omega0: Pq_Symplectic_Form,
        omega1: Pq_Symplectic_Form,
        *,
        samples: int = 200,
        grid: int = 21,
        seed: int = 0,
        cohomology_tol: float = COHOMOLOGY_TOLERANCE,
    ) -> None:
        """
        The linear path omega_t = omega0 + t (omega1 - omega0).

        :param grid: number of equally spaced t in [0, 1] at which nondegeneracy is checked
        :param cohomology_tol: allowed difference of total integrals on closed surfaces
        """
        if omega0.chart != omega1.chart:
            raise ChartMismatchError(f"{omega0!r} and {omega1!r} live on different charts")
        self.omega0 = omega0
        self.omega1 = omega1
        pts = self.chart.sample(samples, np.random.default_rng(seed))
        m0, m1 = omega0.matrix(pts), omega1.matrix(pts)
        for t in np.linspace(0.0, 1.0, grid):
            dets = np.abs(np.linalg.det(m0 + t * (m1 - m0)))
            if np.min(dets) < NONDEGENERACY_TOLERANCE:
                raise DegenerateFormError(f"omega_t is degenerate at t = {t} near {pts[int(np.argmin(dets))]}")
        if self.chart.is_closed_surface:
            diff = omega1.total_integral() - omega0.total_integral()
            if abs(diff) > cohomology_tol:
                raise CohomologyObstructionError(diff, f"total integrals differ by {diff!r}, the classes are not equal")

    def __repr__(self) -> str:
        return f"Pq_Moser_Path({self.omega0!r} -> {self.omega1!r})"

    @property
    def chart(self) -> Pq_Chart:
        return self.omega0.chart

    def difference(self) -> Pq_Differential_Form:
        return self.omega1.form - self.omega0.form

    def omega_t(self, t: float) -> Pq_Differential_Form:
        return self.omega0.form + self.difference().scale(t)

    def matrix(self, t: float, pts) -> np.ndarray:
        m0 = self.omega0.matrix(pts)
        return m0 + t * (self.omega1.matrix(pts) - m0)


def primitive_for_path(path: Pq_Moser_Path, *, samples: int = 200) -> Pq_Primitive:
    """Primitive of omega1 - omega0: radial homotopy on star-shaped charts, fiber integration on the sphere."""
    return primitive_for_difference(path.omega0.form, path.omega1.form, samples=samples)


def _as_form(alpha: Pq_Primitive | Pq_Differential_Form) -> Pq_Differential_Form:
    return alpha.form if isinstance(alpha, Pq_Primitive) else alpha


def moser_vector_field(
    path: Pq_Moser_Path,
    alpha: Pq_Primitive | Pq_Differential_Form,
    t: float,
    p: Pq_Point | np.ndarray,
) -> np.ndarray:
    """
    X_t with iota_X omega_t = -alpha, i.e. T X = alpha for the coefficient matrix T of omega_t.

    Accepts a single point or an (n, dim) array and returns vectors of the same shape.
    """
    is_single = isinstance(p, Pq_Point)
    pts = as_points(p.array if isinstance(p, Pq_Point) else p, path.chart.dim)
    mat = path.matrix(t, pts)
    dets = np.abs(np.linalg.det(mat))
    if np.min(dets, initial=np.inf) < NONDEGENERACY_TOLERANCE:
        raise DegenerateFormError(f"omega_{t} is degenerate at {pts[int(np.argmin(dets))]}")
    rhs = np.real(_as_form(alpha).components(pts, is_validate=False))
    vec = np.linalg.solve(mat, rhs[..., None])[..., 0]
    return vec[0] if is_single else vec


class Pq_Flow_Map(Pq_Smooth_Map):
    def __init__(
        self,
        path: Pq_Moser_Path,
        alpha: Pq_Primitive | Pq_Differential_Form,
        steps: int = MOSER_STEPS,
        *,
        is_reverse: bool = False,
        fd_step: float = FD_STEP,
    ) -> None:
        """
        Time-one map of the Moser field by classical fourth-order Runge-Kutta, vectorized over points.

        :param steps: number of equal time steps over [0, 1]
        :param is_reverse: integrate from t = 1 back to t = 0, giving the inverse map
        """
        if steps < 1:
            raise ValueError(f"step count must be positive, got {steps}")
        self.path = path
        self.alpha = _as_form(alpha)
        self.steps = steps
        self.is_reverse = is_reverse
        self.time_range = (0.0, 1.0)
        self._cache: OrderedDict[bytes, np.ndarray] = OrderedDict()
        direction = "reverse" if is_reverse else "forward"
        super().__init__(path.chart, path.chart, self._flow, name=f"moser_{direction}[N={steps}]", fd_step=fd_step)

    def _field(self, y: np.ndarray, t: float) -> np.ndarray:
        return moser_vector_field(self.path, self.alpha, t, y)

    def _check_inside(self, y: np.ndarray, start: np.ndarray) -> None:
        inside = self.path.chart.contains(y)
        if not inside.all():
            i = int(np.argmin(inside))
            raise ChartEscapeError(
                tuple(float(c) for c in start[i]),
                f"Moser trajectory from {tuple(float(c) for c in start[i])} left {self.path.chart.name}"
                f" at {tuple(float(c) for c in y[i])}",
            )

    def _flow(self, pts: np.ndarray) -> np.ndarray:
        key = pts.tobytes()
        if key in self._cache:
            self._cache.move_to_end(key)
            return self._cache[key].copy()
        if self.alpha.is_zero:
            return pts.copy()
        h = (-1.0 if self.is_reverse else 1.0) / self.steps
        t = 1.0 if self.is_reverse else 0.0
        y = pts.copy()
        self._check_inside(y, pts)
        for _ in range(self.steps):
            k1 = self._field(y, t)
            k2 = self._field(y + 0.5 * h * k1, t + 0.5 * h)
            k3 = self._field(y + 0.5 * h * k2, t + 0.5 * h)
            k4 = self._field(y + h * k3, t + h)
            y = y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0
            t += h
            self._check_inside(y, pts)
        self._cache[key] = y
        if len(self._cache) > FLOW_CACHE_SIZE:
            self._cache.popitem(last=False)
        return y.copy()


def moser_flow(
    path: Pq_Moser_Path,
    alpha: Pq_Primitive | Pq_Differential_Form,
    steps: int = MOSER_STEPS,
    *,
    is_reverse: bool = False,
) -> Pq_Flow_Map:
    logging.debug(f"Moser flow on {path.chart.name} with {steps} RK4 steps, reverse={is_reverse}")
    return Pq_Flow_Map(path, alpha, steps, is_reverse=is_reverse)


def pullback_residual(flow: Pq_Smooth_Map, omega0: Pq_Symplectic_Form, omega1: Pq_Symplectic_Form, pts) -> float:
    """sup over pts of |flow^* omega1 - omega0|."""
    pulled = pullback_form(flow, omega1.form)
    return (pulled - omega0.form).sup_norm(pts)


def invertibility_residual(path: Pq_Moser_Path, alpha, steps: int, pts) -> float:
    """sup |Phi^-1(Phi(p)) - p| with the inverse obtained by reverse-time integration."""
    forward = moser_flow(path, alpha, steps)
    backward = moser_flow(path, alpha, steps, is_reverse=True)
    arr = as_points(pts, path.chart.dim)
    return float(np.max(np.abs(backward(forward(arr)) - arr), initial=0.0))


class Pq_Flow_Convergence(NamedTuple):
    steps: tuple[int, ...]
    residuals: tuple[float, ...]
    ratios: tuple[float, ...]
    # every consecutive pair shrank by at least CONVERGENCE_RATIO
    is_converging: bool
    # every refined residual is at or below the finite-difference floor
    is_at_floor: bool


def convergence_verdict(
    residuals: Sequence[float], floor: float = CONVERGENCE_FLOOR
) -> tuple[tuple[float, ...], bool, bool]:
    """
    Ratios of consecutive residuals, whether all of them reach CONVERGENCE_RATIO, and whether all refined
    residuals sit at or below `floor`. Reaching the floor does not count as converging.
    """
    if len(residuals) < 2:
        raise ValueError(f"convergence needs at least two residuals, got {len(residuals)}")
    ratios = tuple(coarse / fine if fine > 0 else np.inf for coarse, fine in zip(residuals, residuals[1:]))
    is_converging = all(ratio >= CONVERGENCE_RATIO for ratio in ratios)
    is_at_floor = all(fine <= floor for fine in residuals[1:])
    return ratios, is_converging, is_at_floor


def flow_convergence(
    path: Pq_Moser_Path,
    alpha,
    steps: Sequence[int] = (100, 200, 400),
    *,
    samples: int = 200,
    seed: int = 0,
    floor: float = CONVERGENCE_FLOOR,
) -> Pq_Flow_Convergence:
    """
    Pullback residuals for increasing step counts. The run converges when every refinement shrinks the
    residual by at least 4x, reaching the finite-difference floor is reported separately.
    """
    pts = path.chart.sample(samples, np.random.default_rng(seed))
    residuals = tuple(
        pullback_residual(moser_flow(path, alpha, n), path.omega0, path.omega1, pts) for n in steps
    )
    ratios, is_converging, is_at_floor = convergence_verdict(residuals, floor)
    logging.debug(f"Moser convergence: steps {tuple(steps)}, residuals {residuals}, ratios {ratios}")
    return Pq_Flow_Convergence(tuple(steps), residuals, ratios, is_converging, is_at_floor)


def darboux_chart(
    omega: Pq_Symplectic_Form,
    p: Pq_Point | Sequence[float],
    radius: float,
    *,
    steps: int = 100,
    samples: int = 200,
    seed: int = 0,
) -> Pq_Smooth_Map:
    """
    Map Psi from the ball of the given radius with Psi^* omega = sum dx_i ^ dy_i.

    Psi = L o Phi, where L(u) = p + T u normalizes omega(p) by symplectic_frame and Phi is the Moser flow
    from the standard form to L^* omega on the ball.
    """
    chart = omega.chart
    center = p.array if isinstance(p, Pq_Point) else np.asarray(p, dtype=float)
    chart.validate(center[None, :], what="Darboux center")
    frame = symplectic_frame(omega.matrix(center[None, :])[0])
    ball = disk_chart(radius, chart.dim, name=f"darboux(r={radius})")
    linear = Pq_Smooth_Map.affine(ball, chart, center, frame)

    rng = np.random.default_rng(seed)
    boundary = ball.sample(samples, rng, shrink=1.0)
    boundary *= radius / np.maximum(np.linalg.norm(boundary, axis=1, keepdims=True), 1e-300)
    if not chart.contains(linear(boundary)).all():
        raise ShrinkRadiusError(radius, radius / 2)

    standard = Pq_Symplectic_Form.standard(ball)
    pulled = Pq_Symplectic_Form(pullback_form(linear, omega.form), samples=samples, seed=seed)
    path = Pq_Moser_Path(standard, pulled, samples=samples, seed=seed)
    alpha = primitive_for_path(path, samples=samples)
    flow = moser_flow(path, alpha, steps)
    try:
        flow(ball.sample(samples, rng))
    except ChartEscapeError as e:
        logging.warning(f"Darboux flow escaped the ball of radius {radius}: {e}")
        raise ShrinkRadiusError(radius, radius / 2) from e
    except DomainError as e:
        raise ShrinkRadiusError(radius, radius / 2) from e
    psi = linear.compose(flow)
    psi.name = f"darboux@{tuple(float(c) for c in center)}"
    return psi
