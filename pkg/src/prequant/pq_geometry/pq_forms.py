#!/usr/bin/env python3

import logging
from collections.abc import Callable, Iterable, Sequence
from itertools import combinations, permutations

import numpy as np

from prequant.pq_exceptions import (
    ChartMismatchError,
    DegreeOverflowError,
    DegreeZeroError,
    DimensionMismatchError,
    JacobianError,
    PoleDecayError,
    TopDegreeError,
)
from prequant.pq_geometry.pq_charts import Pq_Chart
from prequant.pq_geometry.pq_fields import (
    FD_STEP,
    Pq_Scalar_Field,
    Pq_Smooth_Map,
    Reality,
    as_points,
    combine_reality_sum,
)
from prequant.pq_geometry.pq_paths import Pq_Path
from prequant.pq_geometry.pq_quadrature import GAUSS_ORDER, TRAPEZOID_NODES, Pq_Region

MultiIndex = tuple[int, ...]
# (n, dim) coordinates -> (n, dim) vector components
VectorField = Callable[[np.ndarray], np.ndarray]


def permutation_sign(seq: Sequence[int]) -> int:
    """
    Sign of the permutation sorting seq, 0 when seq has repeated entries.

    >>> permutation_sign((0, 1)), permutation_sign((1, 0)), permutation_sign((1, 1))
    (1, -1, 0)
    """
    if len(set(seq)) != len(seq):
        return 0
    inversions = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    return -1 if inversions % 2 else 1


class Pq_Differential_Form:
    def __init__(
        self,
        chart: Pq_Chart,
        degree: int,
        coefficients: dict[MultiIndex, Pq_Scalar_Field] | None = None,
        *,
        name: str = "",
    ) -> None:
        """
        :param coefficients: multi-index -> coefficient field, any index order is accepted and
            brought to increasing order with the matching sign, repeated indices are dropped
        """
        if not 0 <= degree <= chart.dim:
            raise DimensionMismatchError(f"degree {degree} is outside 0..{chart.dim} on {chart.name}")
        self.chart = chart
        self.degree = degree
        self.name = name
        self.coefficients: dict[MultiIndex, Pq_Scalar_Field] = {}
        for idx, field in (coefficients or {}).items():
            idx = tuple(int(i) for i in idx)
            if len(idx) != degree or any(not 0 <= i < chart.dim for i in idx):
                raise DimensionMismatchError(f"multi-index {idx} does not fit a {degree}-form on {chart.name}")
            sign = permutation_sign(idx)
            if sign == 0:
                continue
            key = tuple(sorted(idx))
            term = field if sign > 0 else -field
            self.coefficients[key] = self.coefficients[key] + term if key in self.coefficients else term
        self.coefficients = dict(sorted(self.coefficients.items()))

    def __repr__(self) -> str:
        terms = ", ".join(self.basis_label(idx) for idx in self.coefficients) or "0"
        return f"Pq_Differential_Form({self.name or '<anonymous>'}, degree={self.degree}, {self.chart.name}: {terms})"

    def basis_label(self, idx: MultiIndex) -> str:
        return "^".join(f"d{self.chart.coord_names[i]}" for i in idx) or "1"

    @property
    def reality(self) -> Reality:
        reality: Reality = "real"
        for i, field in enumerate(self.coefficients.values()):
            reality = field.reality if i == 0 else combine_reality_sum(reality, field.reality)
        return reality

    @property
    def is_zero(self) -> bool:
        return not self.coefficients

    def coefficient(self, idx: MultiIndex) -> Pq_Scalar_Field:
        sign = permutation_sign(idx)
        key = tuple(sorted(idx))
        if sign == 0 or key not in self.coefficients:
            return Pq_Scalar_Field.zero()
        field = self.coefficients[key]
        return field if sign > 0 else -field

    # > Evaluation
    def evaluate(self, pts, *, is_validate: bool = True) -> dict[MultiIndex, np.ndarray]:
        arr = as_points(pts, self.chart.dim)
        if is_validate:
            self.chart.validate(arr, what=f"evaluation of {self.name or 'form'}")
        return {idx: field(arr) for idx, field in self.coefficients.items()}

    def dense(self, pts, *, is_validate: bool = True) -> np.ndarray:
        """Fully antisymmetric coefficient tensor, shape (n,) + (dim,) * degree."""
        arr = as_points(pts, self.chart.dim)
        values = self.evaluate(arr, is_validate=is_validate)
        dtype = complex if any(np.iscomplexobj(v) for v in values.values()) else float
        tensor = np.zeros((arr.shape[0],) + (self.chart.dim,) * self.degree, dtype=dtype)
        if self.degree == 0:
            for value in values.values():
                tensor += value
            return tensor
        for idx, value in values.items():
            for perm in permutations(range(self.degree)):
                permuted = tuple(idx[p] for p in perm)
                tensor[(slice(None),) + permuted] = permutation_sign(perm) * value
        return tensor

    def components(self, pts, *, is_validate: bool = True) -> np.ndarray:
        if self.degree != 1:
            raise DimensionMismatchError(f"components are defined for 1-forms, got degree {self.degree}")
        return self.dense(pts, is_validate=is_validate)

    def matrix(self, pts, *, is_validate: bool = True) -> np.ndarray:
        if self.degree != 2:
            raise DimensionMismatchError(f"coefficient matrices are defined for 2-forms, got degree {self.degree}")
        return self.dense(pts, is_validate=is_validate)

    def sup_norm(self, pts) -> float:
        values = self.evaluate(pts, is_validate=False)
        return max((float(np.max(np.abs(v))) for v in values.values()), default=0.0)

    # > Algebra
    def _check_compatible(self, other: "Pq_Differential_Form") -> None:
        if other.chart != self.chart:
            raise ChartMismatchError(f"{self!r} and {other!r} live on different charts")
        if other.degree != self.degree:
            raise DimensionMismatchError(f"cannot add forms of degrees {self.degree} and {other.degree}")

    def __add__(self, other: "Pq_Differential_Form") -> "Pq_Differential_Form":
        self._check_compatible(other)
        coefficients = dict(self.coefficients)
        for idx, field in other.coefficients.items():
            coefficients[idx] = coefficients[idx] + field if idx in coefficients else field
        return Pq_Differential_Form(self.chart, self.degree, coefficients, name=f"{self.name}+{other.name}")

    def __neg__(self) -> "Pq_Differential_Form":
        return self.scale(-1.0)

    def __sub__(self, other: "Pq_Differential_Form") -> "Pq_Differential_Form":
        return self + (-other)

    def scale(self, c: complex) -> "Pq_Differential_Form":
        return Pq_Differential_Form(
            self.chart, self.degree, {idx: field.scale(c) for idx, field in self.coefficients.items()}, name=self.name
        )

    def multiply(self, f: Pq_Scalar_Field) -> "Pq_Differential_Form":
        return Pq_Differential_Form(
            self.chart, self.degree, {idx: f * field for idx, field in self.coefficients.items()}, name=self.name
        )

    # > Construction helpers
    @classmethod
    def zero(cls, chart: Pq_Chart, degree: int) -> "Pq_Differential_Form":
        return cls(chart, degree, name="0")

    @classmethod
    def function(cls, chart: Pq_Chart, f: Pq_Scalar_Field) -> "Pq_Differential_Form":
        return cls(chart, 0, {(): f}, name=f.name)

    @classmethod
    def basis(cls, chart: Pq_Chart, *coords: str | int, coefficient: Pq_Scalar_Field | float = 1.0) -> "Pq_Differential_Form":
        """coefficient * dx_a ^ dx_b ^ ..., coordinates given by name or index."""
        idx = tuple(chart.index(c) if isinstance(c, str) else int(c) for c in coords)
        field = coefficient if isinstance(coefficient, Pq_Scalar_Field) else Pq_Scalar_Field.constant(coefficient)
        return cls(chart, len(idx), {idx: field})

    @classmethod
    def one_form(cls, chart: Pq_Chart, components: Sequence[Pq_Scalar_Field | float | None], name: str = "") -> "Pq_Differential_Form":
        if len(components) != chart.dim:
            raise DimensionMismatchError(f"{chart.name} 1-forms need {chart.dim} components, got {len(components)}")
        coefficients = {}
        for i, comp in enumerate(components):
            if comp is None:
                continue
            coefficients[(i,)] = comp if isinstance(comp, Pq_Scalar_Field) else Pq_Scalar_Field.constant(comp)
        return cls(chart, 1, coefficients, name=name)

    @classmethod
    def top(cls, chart: Pq_Chart, coefficient: Pq_Scalar_Field | float, name: str = "") -> "Pq_Differential_Form":
        field = coefficient if isinstance(coefficient, Pq_Scalar_Field) else Pq_Scalar_Field.constant(coefficient)
        return cls(chart, chart.dim, {tuple(range(chart.dim)): field}, name=name)

    @classmethod
    def standard_symplectic(cls, chart: Pq_Chart) -> "Pq_Differential_Form":
        """sum_i dx_i ^ dx_{i+n} in the coordinate order of the chart."""
        if chart.dim % 2:
            raise DimensionMismatchError(f"{chart.name} is odd dimensional")
        n = chart.dim // 2
        one = Pq_Scalar_Field.constant(1.0)
        return cls(chart, 2, {(i, i + n): one for i in range(n)}, name="omega_std")

    # > Sampled checks
    def check_pole_decay(self, pole: float, *, band: float | None = None, nodes: int = 16) -> float:
        """
        Sampled first-order decay of the dtheta coefficients at z = pole on the cylindrical sphere chart.
        Returns the decay ratio max|coeff| / (1 - |z|) measured at the band.
        """
        itheta, iz = self.chart.index("theta"), self.chart.index("z")
        band = band if band is not None else (self.chart.exclusion_band[iz] or 1e-3)
        theta = np.linspace(0.0, 2 * np.pi, nodes, endpoint=False)

        def sup_at(distance: float) -> float:
            pts = np.zeros((nodes, self.chart.dim))
            pts[:, itheta] = theta
            pts[:, iz] = pole * (1.0 - distance)
            values = self.evaluate(pts, is_validate=False)
            return max(
                (float(np.max(np.abs(v))) for idx, v in values.items() if itheta in idx),
                default=0.0,
            )

        bound = max(1.0, 2.0 * sup_at(0.1) / 0.1)
        ratio = sup_at(band) / band
        if ratio > bound:
            raise PoleDecayError(
                f"dtheta coefficients of {self.name or 'form'} do not vanish at z = {pole}: ratio {ratio:.3e} > {bound:.3e}"
            )
        return ratio


def _increasing(dim: int, degree: int) -> Iterable[MultiIndex]:
    return combinations(range(dim), degree)


def _partial(field: Pq_Scalar_Field, pts: np.ndarray, i: int, h: float) -> np.ndarray:
    if field.has_gradient:
        return field.gradient(pts)[:, i]
    steps = h * np.maximum(1.0, np.abs(pts[:, i]))
    plus, minus = pts.copy(), pts.copy()
    plus[:, i] += steps
    minus[:, i] -= steps
    return (field(plus) - field(minus)) / (plus[:, i] - minus[:, i])


def exterior_derivative(f: Pq_Differential_Form, h: float = FD_STEP) -> Pq_Differential_Form:
    """d f, from analytic gradients when the coefficients carry them, else central differences with relative step h."""
    if f.degree >= f.chart.dim:
        raise TopDegreeError(f"d of a top-degree form on {f.chart.name} is not defined here")
    coefficients: dict[MultiIndex, Pq_Scalar_Field] = {}
    for target in _increasing(f.chart.dim, f.degree + 1):
        terms = [
            ((-1) ** p, target[p], f.coefficients[target[:p] + target[p + 1 :]])
            for p in range(len(target))
            if target[:p] + target[p + 1 :] in f.coefficients
        ]
        if not terms:
            continue

        def evaluator(pts: np.ndarray, terms=terms) -> np.ndarray:
            return sum(sign * _partial(field, pts, i, h) for sign, i, field in terms)

        reality: Reality = terms[0][2].reality
        for _, _, field in terms[1:]:
            reality = combine_reality_sum(reality, field.reality)
        coefficients[target] = Pq_Scalar_Field(evaluator, reality=reality, name=f"d_{target}")
    logging.debug(f"d of a {f.degree}-form on {f.chart.name}: {len(coefficients)} nonzero coefficients")
    return Pq_Differential_Form(f.chart, f.degree + 1, coefficients, name=f"d({f.name})")


def wedge(a: Pq_Differential_Form, b: Pq_Differential_Form) -> Pq_Differential_Form:
    if a.chart != b.chart:
        raise ChartMismatchError(f"cannot wedge forms on {a.chart.name} and {b.chart.name}")
    if a.degree + b.degree > a.chart.dim:
        raise DegreeOverflowError(f"degrees {a.degree} + {b.degree} exceed dimension {a.chart.dim}")
    coefficients: dict[MultiIndex, Pq_Scalar_Field] = {}
    for idx_a, field_a in a.coefficients.items():
        for idx_b, field_b in b.coefficients.items():
            sign = permutation_sign(idx_a + idx_b)
            if sign == 0:
                continue
            key = tuple(sorted(idx_a + idx_b))
            term = field_a * field_b if sign > 0 else -(field_a * field_b)
            coefficients[key] = coefficients[key] + term if key in coefficients else term
    return Pq_Differential_Form(a.chart, a.degree + b.degree, coefficients, name=f"{a.name}^{b.name}")


def pullback_form(m: Pq_Smooth_Map, f: Pq_Differential_Form) -> Pq_Differential_Form:
    """m^* f: coefficients composed with m and contracted with minors of its Jacobian."""
    if m.target != f.chart:
        raise ChartMismatchError(f"{m!r} maps into {m.target.name}, the form lives on {f.chart.name}")
    if f.degree == 0:
        coefficients = {(): field.compose(m) for field in f.coefficients.values()}
        return Pq_Differential_Form(m.source, 0, coefficients, name=f"{m.name}^*{f.name}")

    def checked_jacobian(pts: np.ndarray) -> np.ndarray:
        jac = m.jacobian(pts)
        if not np.all(np.isfinite(jac)):
            raise JacobianError(f"Jacobian of {m!r} is not finite at some sample")
        return jac

    coefficients = {}
    for target in _increasing(m.source.dim, f.degree):
        sources = list(f.coefficients.items())
        if not sources:
            break

        def evaluator(pts: np.ndarray, target=target, sources=sources) -> np.ndarray:
            images = m(pts)
            jac = checked_jacobian(pts)
            total = np.zeros(pts.shape[0], dtype=complex)
            for idx, field in sources:
                minor = jac[:, list(idx)][:, :, list(target)]
                total = total + field(images) * np.linalg.det(minor)
            return total

        reality = f.reality
        coefficients[target] = Pq_Scalar_Field(evaluator, reality=reality, name=f"{m.name}^*{target}")
    return Pq_Differential_Form(m.source, f.degree, coefficients, name=f"{m.name}^*{f.name}")


def interior_product(v: VectorField, f: Pq_Differential_Form) -> Pq_Differential_Form:
    """iota_v f, contraction in the first slot."""
    if f.degree == 0:
        raise DegreeZeroError("interior product of a 0-form")
    if not callable(v):
        constant = np.asarray(v, dtype=float)

        def v(pts: np.ndarray) -> np.ndarray:
            return np.broadcast_to(constant, pts.shape)

    vector_field = v
    coefficients: dict[MultiIndex, Pq_Scalar_Field] = {}
    for target in _increasing(f.chart.dim, f.degree - 1):
        terms = []
        for i in range(f.chart.dim):
            if i in target:
                continue
            key = tuple(sorted((i,) + target))
            if key in f.coefficients:
                terms.append((permutation_sign((i,) + target), i, f.coefficients[key]))
        if not terms:
            continue

        def evaluator(pts: np.ndarray, terms=terms) -> np.ndarray:
            vec = np.asarray(vector_field(pts))
            return sum(sign * vec[:, i] * field(pts) for sign, i, field in terms)

        coefficients[target] = Pq_Scalar_Field(evaluator, reality=f.reality, name=f"i_v{target}")
    return Pq_Differential_Form(f.chart, f.degree - 1, coefficients, name=f"i_v({f.name})")


def integrate_form(
    f: Pq_Differential_Form,
    domain: Pq_Region | Pq_Path,
    order: int = GAUSS_ORDER,
    trapezoid_nodes: int = TRAPEZOID_NODES,
) -> complex:
    """Integral of f over a coordinate box (top-degree forms) or a parametrized curve (1-forms)."""
    if domain.chart != f.chart:
        raise ChartMismatchError(f"the domain lives on {domain.chart.name}, the form on {f.chart.name}")
    if isinstance(domain, Pq_Path):
        return domain.line_integral(f, gauss_order=order, trapezoid_nodes=trapezoid_nodes)
    if f.degree != f.chart.dim:
        raise DimensionMismatchError(f"regions of dimension {f.chart.dim} integrate top-degree forms, got {f.degree}")
    points, weights = domain.rule(order, trapezoid_nodes)
    density = f.coefficient(tuple(range(f.chart.dim)))(points)
    return complex(domain.orientation * np.sum(weights * density))
