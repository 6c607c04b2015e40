#!/usr/bin/env python3

import logging

import numpy as np

from prequant.pq_exceptions import ContractError, DegenerateFormError, DimensionMismatchError, DomainError
from prequant.pq_geometry.pq_charts import Pq_Chart
from prequant.pq_geometry.pq_forms import Pq_Differential_Form, integrate_form
from prequant.pq_geometry.pq_quadrature import GAUSS_ORDER, TRAPEZOID_NODES

NONDEGENERACY_TOLERANCE = 1e-10
SINGULAR_TOLERANCE = 1e-12
DEFAULT_SAMPLES = 200


def standard_block(n: int) -> np.ndarray:
    """
    The matrix (0 I; -I 0) of size 2n.

    >>> standard_block(1).tolist()
    [[0.0, 1.0], [-1.0, 0.0]]
    """
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def symplectic_frame(matrix) -> np.ndarray:
    """
    Change of basis T with T^T M T = (0 I; -I 0), by symplectic Gram-Schmidt on the standard basis.

    Each round pairs the two remaining vectors with the largest |M(u, v)|, ties going to the lowest
    indices, normalizes the pair symmetrically and projects it out of the rest. Columns of T are
    ordered e_1..e_n, f_1..f_n.
    """
    mat = np.asarray(matrix, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] % 2:
        raise DimensionMismatchError(f"expected an even square matrix, got shape {mat.shape}")
    if np.max(np.abs(mat + mat.T), initial=0.0) > SINGULAR_TOLERANCE * max(1.0, np.max(np.abs(mat))):
        raise ContractError("matrix is not antisymmetric")
    det = np.linalg.det(mat)
    if abs(det) < SINGULAR_TOLERANCE:
        raise DegenerateFormError(f"singular form: |det| = {abs(det):.3e}")

    dim = mat.shape[0]
    n = dim // 2

    def pairing(u: np.ndarray, v: np.ndarray) -> float:
        return float(u @ mat @ v)

    remaining = {i: np.eye(dim)[:, i] for i in range(dim)}
    es, fs = [], []
    for _ in range(n):
        keys = sorted(remaining)
        best = None
        for a_pos, i in enumerate(keys):
            for j in keys[a_pos + 1 :]:
                value = pairing(remaining[i], remaining[j])
                if best is None or abs(value) > abs(best[2]) + SINGULAR_TOLERANCE:
                    best = (i, j, value)
        if best is None or abs(best[2]) < SINGULAR_TOLERANCE:
            raise DegenerateFormError("no nondegenerate pair left in symplectic Gram-Schmidt")
        i, j, c = best
        scale = np.sqrt(abs(c))
        e = remaining.pop(i) / scale
        f = np.sign(c) * remaining.pop(j) / scale
        for k, w in remaining.items():
            remaining[k] = w - pairing(w, f) * e + pairing(w, e) * f
        es.append(e)
        fs.append(f)
    return np.column_stack(es + fs)


class Pq_Symplectic_Form:
    def __init__(
        self,
        form: Pq_Differential_Form,
        *,
        samples: int = DEFAULT_SAMPLES,
        seed: int = 0,
        is_check: bool = True,
    ) -> None:
        """
        A real closed 2-form checked for nondegeneracy at sample points.

        :param samples: number of chart samples at which |det| >= 1e-10 is checked
        :param is_check: skipped only by the degenerate constructor used for flat test doubles
        """
        if form.degree != 2:
            raise DimensionMismatchError(f"symplectic forms have degree 2, got {form.degree}")
        if form.reality != "real":
            raise ContractError(f"symplectic forms are real, {form!r} is {form.reality}")
        self.form = form
        self.is_degenerate = not is_check
        if is_check:
            pts = form.chart.sample(samples, np.random.default_rng(seed))
            dets = np.abs(np.linalg.det(self.matrix(pts)))
            if np.min(dets) < NONDEGENERACY_TOLERANCE:
                worst = pts[int(np.argmin(dets))]
                raise DegenerateFormError(f"{form.name or 'form'} is degenerate at {tuple(float(c) for c in worst)}")

    def __repr__(self) -> str:
        return f"Pq_Symplectic_Form({self.form.name or '<anonymous>'}, {self.chart.name})"

    @property
    def chart(self) -> Pq_Chart:
        return self.form.chart

    def matrix(self, pts, *, is_validate: bool = False) -> np.ndarray:
        return np.real(self.form.matrix(pts, is_validate=is_validate))

    def total_integral(self, order: int = GAUSS_ORDER, trapezoid_nodes: int = TRAPEZOID_NODES) -> float:
        """Integral over the whole surface in its fixed orientation."""
        if self.chart.dim != 2 or not self.chart.is_closed_surface:
            raise DomainError(f"{self.chart.name} is not a closed surface chart")
        value = integrate_form(self.form, self.chart.total_region(), order, trapezoid_nodes)
        logging.debug(f"Total integral of {self.form.name or 'form'} over {self.chart.name}: {value.real!r}")
        return float(value.real)

    def scale(self, c: float) -> "Pq_Symplectic_Form":
        return Pq_Symplectic_Form(self.form.scale(c), is_check=not self.is_degenerate)

    @classmethod
    def standard(cls, chart: Pq_Chart) -> "Pq_Symplectic_Form":
        return cls(Pq_Differential_Form.standard_symplectic(chart))

    @classmethod
    def area(cls, chart: Pq_Chart, density: float = 1.0, name: str = "") -> "Pq_Symplectic_Form":
        """density times the positive area form of a surface chart (dz^dtheta on the sphere)."""
        if chart.dim != 2:
            raise DimensionMismatchError(f"area forms live on surfaces, {chart.name} has dimension {chart.dim}")
        form = Pq_Differential_Form.top(chart, density * chart.orientation, name=name or f"{density}*area")
        return cls(form)

    @classmethod
    def degenerate(cls, form: Pq_Differential_Form) -> "Pq_Symplectic_Form":
        """Unchecked base form, for flat test doubles such as omega = 0."""
        return cls(form, is_check=False)
