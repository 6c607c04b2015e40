#!/usr/bin/env python3

from collections.abc import Callable
from typing import Literal

import numpy as np

from prequant.pq_exceptions import ChartMismatchError, HermitianViolationError
from prequant.pq_geometry.pq_charts import Pq_Chart
from prequant.pq_utils import sup_norm

# Relative central-difference step
FD_STEP = 1e-5
# Agreement required between an analytic derivative and central differences
FD_TOLERANCE = 1e-6
# Largest disallowed part tolerated by reality flags
REALITY_TOLERANCE = 1e-12

Reality = Literal["real", "imaginary", "complex"]
# Evaluators take an (n, dim) coordinate array and return an (n,) array
Evaluator = Callable[[np.ndarray], np.ndarray]


def as_points(pts, dim: int | None = None) -> np.ndarray:
    arr = np.array(pts, dtype=float, ndmin=2)
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"expected points with {dim} coordinates, got shape {arr.shape}")
    return arr


def central_difference(func: Callable[[np.ndarray], np.ndarray], pts: np.ndarray, h: float = FD_STEP) -> np.ndarray:
    """
    Central differences of func at pts with relative step h, derivative axis last.

    The perturbed coordinates are formed first and their difference is used as the
    denominator, so steps are exactly representable and the identity map differentiates
    to exactly 1.
    """
    pts = as_points(pts)
    n, dim = pts.shape
    steps = h * np.maximum(1.0, np.abs(pts))
    stacked = np.empty((dim, 2, n, dim))
    denominators = np.empty((dim, n))
    for i in range(dim):
        plus = pts.copy()
        minus = pts.copy()
        plus[:, i] = pts[:, i] + steps[:, i]
        minus[:, i] = pts[:, i] - steps[:, i]
        stacked[i, 0] = plus
        stacked[i, 1] = minus
        denominators[i] = plus[:, i] - minus[:, i]
    values = np.asarray(func(stacked.reshape(dim * 2 * n, dim)))
    values = values.reshape((dim, 2, n) + values.shape[1:])
    extra_axes = (1,) * (values.ndim - 3)
    derivative = (values[:, 0] - values[:, 1]) / denominators.reshape((dim, n) + extra_axes)
    return np.moveaxis(derivative, 0, -1)


def combine_reality_sum(a: Reality, b: Reality) -> Reality:
    return a if a == b else "complex"


def combine_reality_product(a: Reality, b: Reality) -> Reality:
    if "complex" in (a, b):
        return "complex"
    return "real" if a == b else "imaginary"


def reality_of_constant(value: complex) -> Reality:
    value = complex(value)
    if value.imag == 0:
        return "real"
    if value.real == 0:
        return "imaginary"
    return "complex"


class Pq_Scalar_Field:
    def __init__(
        self,
        evaluator: Evaluator,
        *,
        reality: Reality = "real",
        gradient: Callable[[np.ndarray], np.ndarray] | None = None,
        name: str = "",
    ) -> None:
        """
        :param evaluator: (n, dim) coordinates -> (n,) values
        :param reality: which part of the values may be nonzero
        :param gradient: optional analytic gradient, (n, dim) coordinates -> (n, dim)
        :param name: label used in logs and reprs
        """
        if reality not in ("real", "imaginary", "complex"):
            raise ValueError(f"unknown reality flag {reality!r}")
        self.evaluator = evaluator
        self.reality: Reality = reality
        self.analytic_gradient = gradient
        self.name = name

    def __repr__(self) -> str:
        return f"Pq_Scalar_Field({self.name or '<anonymous>'}, {self.reality})"

    @property
    def has_gradient(self) -> bool:
        return self.analytic_gradient is not None

    def __call__(self, pts) -> np.ndarray:
        arr = as_points(pts)
        values = np.asarray(self.evaluator(arr))
        values = np.broadcast_to(values, (arr.shape[0],)) if values.ndim == 0 else values
        if self.reality == "real" and np.iscomplexobj(values):
            values = values.real
        return values

    def gradient(self, pts, h: float = FD_STEP) -> np.ndarray:
        arr = as_points(pts)
        if self.analytic_gradient is not None:
            grad = np.asarray(self.analytic_gradient(arr))
            return np.broadcast_to(grad, arr.shape) if grad.ndim < 2 else grad
        return central_difference(self, arr, h)

    def check_reality(self, pts, tol: float = REALITY_TOLERANCE) -> float:
        values = np.asarray(self(pts), dtype=complex)
        if self.reality == "real":
            residual = sup_norm(values.imag)
        elif self.reality == "imaginary":
            residual = sup_norm(values.real)
        else:
            residual = 0.0
        if residual > tol:
            raise HermitianViolationError(f"{self!r} has a disallowed part of size {residual:.3e}")
        return residual

    def check_gradient(self, pts, tol: float = FD_TOLERANCE) -> float:
        if self.analytic_gradient is None:
            return 0.0
        arr = as_points(pts)
        residual = sup_norm(self.gradient(arr) - central_difference(self, arr))
        if residual > tol:
            raise ValueError(f"analytic gradient of {self!r} disagrees with central differences by {residual:.3e}")
        return residual

    # > Construction helpers
    @classmethod
    def constant(cls, value: complex, name: str = "") -> "Pq_Scalar_Field":
        reality = reality_of_constant(value)
        value = float(value.real) if isinstance(value, complex) and reality == "real" else value

        def evaluator(pts: np.ndarray) -> np.ndarray:
            return np.full(pts.shape[0], value)

        def gradient(pts: np.ndarray) -> np.ndarray:
            return np.zeros(pts.shape)

        return cls(evaluator, reality=reality, gradient=gradient, name=name or repr(value))

    @classmethod
    def zero(cls) -> "Pq_Scalar_Field":
        return cls.constant(0.0, name="0")

    @classmethod
    def coordinate(cls, index: int, name: str = "") -> "Pq_Scalar_Field":
        def evaluator(pts: np.ndarray) -> np.ndarray:
            return pts[:, index].copy()

        def gradient(pts: np.ndarray) -> np.ndarray:
            grad = np.zeros(pts.shape)
            grad[:, index] = 1.0
            return grad

        return cls(evaluator, gradient=gradient, name=name or f"x{index}")

    # > Algebra, analytic gradients carried along when both operands have them
    def _coerce(self, other) -> "Pq_Scalar_Field":
        if isinstance(other, Pq_Scalar_Field):
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return Pq_Scalar_Field.constant(other)
        return NotImplemented

    def __add__(self, other) -> "Pq_Scalar_Field":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = self, other
        gradient = None
        if a.has_gradient and b.has_gradient:

            def gradient(pts: np.ndarray) -> np.ndarray:
                return a.gradient(pts) + b.gradient(pts)

        return Pq_Scalar_Field(
            lambda pts: a(pts) + b(pts),
            reality=combine_reality_sum(a.reality, b.reality),
            gradient=gradient,
            name=f"({a.name} + {b.name})",
        )

    __radd__ = __add__

    def __neg__(self) -> "Pq_Scalar_Field":
        return self.scale(-1.0)

    def __sub__(self, other) -> "Pq_Scalar_Field":
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other) -> "Pq_Scalar_Field":
        return (-self) + other

    def __mul__(self, other) -> "Pq_Scalar_Field":
        if isinstance(other, (int, float, complex, np.number)):
            return self.scale(other)
        if not isinstance(other, Pq_Scalar_Field):
            return NotImplemented
        a, b = self, other
        gradient = None
        if a.has_gradient and b.has_gradient:

            def gradient(pts: np.ndarray) -> np.ndarray:
                return a.gradient(pts) * b(pts)[:, None] + a(pts)[:, None] * b.gradient(pts)

        return Pq_Scalar_Field(
            lambda pts: a(pts) * b(pts),
            reality=combine_reality_product(a.reality, b.reality),
            gradient=gradient,
            name=f"{a.name}*{b.name}",
        )

    __rmul__ = __mul__

    def scale(self, c: complex) -> "Pq_Scalar_Field":
        a = self
        reality = combine_reality_product(a.reality, reality_of_constant(c))
        if complex(c).imag == 0:
            c = float(complex(c).real)
        gradient = None
        if a.has_gradient:

            def gradient(pts: np.ndarray) -> np.ndarray:
                return c * a.gradient(pts)

        return Pq_Scalar_Field(lambda pts: c * a(pts), reality=reality, gradient=gradient, name=f"{c}*{a.name}")

    def compose(self, m: "Pq_Smooth_Map") -> "Pq_Scalar_Field":
        """The field f o m, defined on the source chart of m."""
        f = self
        gradient = None
        if f.has_gradient and m.has_jacobian:

            def gradient(pts: np.ndarray) -> np.ndarray:
                return np.einsum("ni,nij->nj", f.gradient(m(pts)), m.jacobian(pts))

        return Pq_Scalar_Field(lambda pts: f(m(pts)), reality=f.reality, gradient=gradient, name=f"{f.name}o{m.name}")


class Pq_Smooth_Map:
    def __init__(
        self,
        source: Pq_Chart,
        target: Pq_Chart,
        evaluator: Callable[[np.ndarray], np.ndarray],
        *,
        jacobian: Callable[[np.ndarray], np.ndarray] | None = None,
        name: str = "",
        fd_step: float = FD_STEP,
        is_identity: bool = False,
    ) -> None:
        """
        :param evaluator: (n, source.dim) -> (n, target.dim)
        :param jacobian: optional analytic Jacobian, (n, source.dim) -> (n, target.dim, source.dim)
        :param is_identity: set only by the identity constructor
        """
        if is_identity and source != target:
            raise ChartMismatchError("identity maps need equal source and target charts")
        self.source = source
        self.target = target
        self.evaluator = evaluator
        self.analytic_jacobian = jacobian
        self.name = name or f"{source.name}->{target.name}"
        self.fd_step = fd_step
        self.is_identity = is_identity

    def __repr__(self) -> str:
        return f"Pq_Smooth_Map({self.name})"

    @property
    def has_jacobian(self) -> bool:
        return self.analytic_jacobian is not None

    def __call__(self, pts) -> np.ndarray:
        arr = as_points(pts, self.source.dim)
        return np.asarray(self.evaluator(arr), dtype=float).reshape(arr.shape[0], self.target.dim)

    def jacobian(self, pts) -> np.ndarray:
        arr = as_points(pts, self.source.dim)
        if self.analytic_jacobian is not None:
            return np.asarray(self.analytic_jacobian(arr), dtype=float)
        return central_difference(self, arr, self.fd_step)

    def check_jacobian(self, pts, tol: float = FD_TOLERANCE) -> float:
        if self.analytic_jacobian is None:
            return 0.0
        arr = as_points(pts, self.source.dim)
        residual = sup_norm(self.jacobian(arr) - central_difference(self, arr, self.fd_step))
        if residual > tol:
            raise ValueError(f"analytic Jacobian of {self!r} disagrees with central differences by {residual:.3e}")
        return residual

    def compose(self, inner: "Pq_Smooth_Map") -> "Pq_Smooth_Map":
        """self o inner"""
        if inner.target != self.source:
            raise ChartMismatchError(f"cannot compose {self!r} after {inner!r}: charts differ")
        outer = self
        jacobian = None
        if outer.has_jacobian and inner.has_jacobian:

            def jacobian(pts: np.ndarray) -> np.ndarray:
                return np.einsum("nij,njk->nik", outer.jacobian(inner(pts)), inner.jacobian(pts))

        return Pq_Smooth_Map(
            inner.source,
            outer.target,
            lambda pts: outer(inner(pts)),
            jacobian=jacobian,
            name=f"{outer.name}o{inner.name}",
            fd_step=min(outer.fd_step, inner.fd_step),
        )

    @classmethod
    def identity(cls, chart: Pq_Chart) -> "Pq_Smooth_Map":
        return cls(
            chart,
            chart,
            lambda pts: pts.copy(),
            jacobian=lambda pts: np.broadcast_to(np.eye(chart.dim), (pts.shape[0], chart.dim, chart.dim)).copy(),
            name=f"id_{chart.name}",
            is_identity=True,
        )

    @classmethod
    def translation(cls, chart: Pq_Chart, offset) -> "Pq_Smooth_Map":
        offset = np.asarray(offset, dtype=float)
        return cls(
            chart,
            chart,
            lambda pts: pts + offset,
            jacobian=lambda pts: np.broadcast_to(np.eye(chart.dim), (pts.shape[0], chart.dim, chart.dim)).copy(),
            name=f"shift{tuple(float(o) for o in offset)}",
        )

    @classmethod
    def affine(cls, source: Pq_Chart, target: Pq_Chart, origin, matrix) -> "Pq_Smooth_Map":
        """u -> origin + matrix @ u"""
        origin = np.asarray(origin, dtype=float)
        matrix = np.asarray(matrix, dtype=float)
        if matrix.shape != (target.dim, source.dim):
            raise ValueError(f"matrix shape {matrix.shape} does not match {target.dim}x{source.dim}")
        return cls(
            source,
            target,
            lambda pts: origin + pts @ matrix.T,
            jacobian=lambda pts: np.broadcast_to(matrix, (pts.shape[0],) + matrix.shape).copy(),
            name=f"affine_{source.name}->{target.name}",
        )
