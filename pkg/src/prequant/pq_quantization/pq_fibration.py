#!/usr/bin/env python3

from collections.abc import Callable, Sequence

import numpy as np

from prequant.pq_exceptions import DomainError, SingularLevelError
from prequant.pq_geometry.pq_charts import SPHERE_CYL, TORUS, TORUS4, Pq_Chart
from prequant.pq_geometry.pq_paths import Pq_Path

SINGULAR_DISTANCE = 1e-6


class Pq_Lagrangian_Fibration:
    def __init__(
        self,
        chart: Pq_Chart,
        base: tuple[float, float],
        leaf_loops: Callable[[float], tuple[Pq_Path, ...]],
        *,
        singular_levels: Sequence[float] = (),
        is_periodic_base: bool = False,
        margin: float = 0.0,
        name: str = "",
    ) -> None:
        """
        :param base: interval of base values, one period when is_periodic_base
        :param leaf_loops: base value -> closed generator loops of the leaf
        :param margin: distance kept from the ends of a non-periodic base when scanning
        """
        self.chart = chart
        self.base = (float(base[0]), float(base[1]))
        self.leaf_loops = leaf_loops
        self.singular_levels = tuple(sorted(float(s) for s in singular_levels))
        self.is_periodic_base = is_periodic_base
        self.margin = margin
        self.name = name or f"fibration on {chart.name}"

    def __repr__(self) -> str:
        return f"Pq_Lagrangian_Fibration({self.name})"

    @property
    def period(self) -> float | None:
        return self.base[1] - self.base[0] if self.is_periodic_base else None

    def reduce(self, b: float) -> float:
        if not self.is_periodic_base:
            return b
        lo, hi = self.base
        return lo + float(np.mod(b - lo, hi - lo))

    def check_regular(self, b: float) -> None:
        lo, hi = self.base
        if not self.is_periodic_base and not lo <= b <= hi:
            raise DomainError(f"base value {b} is outside [{lo}, {hi}] of {self.name}")
        for s in self.singular_levels:
            if abs(b - s) <= SINGULAR_DISTANCE:
                raise SingularLevelError(f"base value {b} is the singular level {s} of {self.name}")

    def leaf(self, b: float) -> tuple[Pq_Path, ...]:
        self.check_regular(b)
        return self.leaf_loops(b)

    def grid(self, step: float) -> np.ndarray:
        """Base values at most `step` apart, the whole period for periodic bases."""
        if step <= 0:
            raise ValueError(f"grid step must be positive, got {step}")
        lo, hi = self.base
        if not self.is_periodic_base:
            lo, hi = lo + self.margin, hi - self.margin
        count = int(np.ceil((hi - lo) / step)) + 1
        return np.linspace(lo, hi, count)


def sphere_height_fibration(chart: Pq_Chart = SPHERE_CYL) -> Pq_Lagrangian_Fibration:
    """Latitudes z = b, scheduled in the north region for b >= 0 and in the south region otherwise."""
    lo, hi = chart.bounds[chart.index("z")]
    band = chart.exclusion_band[chart.index("z")] or 0.0

    def leaf_loops(b: float) -> tuple[Pq_Path, ...]:
        return (Pq_Path.latitude(b, region="N" if b >= 0 else "S", chart=chart),)

    return Pq_Lagrangian_Fibration(
        chart, (lo, hi), leaf_loops, singular_levels=(lo, hi), margin=band, name="sphere height"
    )


def torus_linear_fibration(chart: Pq_Chart = TORUS) -> Pq_Lagrangian_Fibration:
    """Circles theta2 = b. A leaf is a circle, its theta1 loop is the only generator."""
    i1, i2 = chart.index("theta1"), chart.index("theta2")
    lo, hi = chart.bounds[i2]

    def leaf_loops(b: float) -> tuple[Pq_Path, ...]:
        start = np.zeros(chart.dim)
        start[i2] = b
        return (Pq_Path.coordinate_circle(chart, i1, start, name=f"theta1-circle(theta2={b})"),)

    return Pq_Lagrangian_Fibration(chart, (lo, hi), leaf_loops, is_periodic_base=True, name="torus linear")


def torus4_fibration(fixed: float = 0.0, chart: Pq_Chart = TORUS4) -> Pq_Lagrangian_Fibration:
    """
    Lagrangian 2-tori theta2 = b, theta4 = fixed of the product torus, one period of b.

    Each leaf is generated by its theta1 and theta3 loops, so integrality needs both holonomies trivial.
    """
    i1, i2, i3, i4 = (chart.index(name) for name in ("theta1", "theta2", "theta3", "theta4"))
    lo, hi = chart.bounds[i2]

    def leaf_loops(b: float) -> tuple[Pq_Path, ...]:
        start = np.zeros(chart.dim)
        start[i2], start[i4] = b, fixed
        return (
            Pq_Path.coordinate_circle(chart, i1, start, name=f"theta1-circle(theta2={b},theta4={fixed})"),
            Pq_Path.coordinate_circle(chart, i3, start, name=f"theta3-circle(theta2={b},theta4={fixed})"),
        )

    return Pq_Lagrangian_Fibration(
        chart, (lo, hi), leaf_loops, is_periodic_base=True, name=f"torus4 slice(theta4={fixed})"
    )
