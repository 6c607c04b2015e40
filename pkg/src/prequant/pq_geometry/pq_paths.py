#!/usr/bin/env python3

import math
from collections.abc import Callable, Iterable
from typing import NamedTuple

import numpy as np

from prequant.pq_exceptions import ChartMismatchError, DimensionMismatchError, OpenPathError, RegionScheduleError
from prequant.pq_geometry.pq_charts import SPHERE_CYL, Pq_Chart
from prequant.pq_geometry.pq_fields import central_difference
from prequant.pq_geometry.pq_quadrature import GAUSS_ORDER, TRAPEZOID_NODES, gauss_legendre, trapezoid_periodic

CLOSURE_TOLERANCE = 1e-9
PARAMETER_STEP = 1e-6


class Pq_Schedule_Entry(NamedTuple):
    start: float
    end: float
    region: str


class Pq_Path:
    def __init__(
        self,
        chart: Pq_Chart,
        parametrization: Callable[[np.ndarray], np.ndarray],
        *,
        velocity: Callable[[np.ndarray], np.ndarray] | None = None,
        is_closed: bool = False,
        is_smooth_loop: bool = False,
        breakpoints: Iterable[float] = (),
        region_schedule: Iterable[tuple[float, float, str]] | None = None,
        name: str = "",
    ) -> None:
        """
        :param parametrization: parameter values s in [0, 1], shape (m,) -> coordinates (m, dim)
        :param velocity: optional analytic derivative in s, same shapes
        :param is_closed: the path ends where it starts modulo periods
        :param is_smooth_loop: closed and smooth as a periodic function of s, integrated with the trapezoid rule
        :param breakpoints: parameters where the path is only piecewise smooth
        :param region_schedule: (start, end, region) entries covering [0, 1] in order
        """
        self.chart = chart
        self.parametrization = parametrization
        self.analytic_velocity = velocity
        self.is_closed = is_closed or is_smooth_loop
        self.is_smooth_loop = is_smooth_loop
        self.breakpoints = tuple(sorted(float(b) for b in breakpoints if 0.0 < b < 1.0))
        self.name = name or "path"
        self.region_schedule: tuple[Pq_Schedule_Entry, ...] | None = None
        if region_schedule is not None:
            self.region_schedule = self._validate_schedule(region_schedule)
        if self.is_closed:
            self._check_closure()

    def __repr__(self) -> str:
        return f"Pq_Path({self.name}, closed={self.is_closed})"

    def _validate_schedule(self, schedule: Iterable[tuple[float, float, str]]) -> tuple[Pq_Schedule_Entry, ...]:
        entries = tuple(Pq_Schedule_Entry(float(a), float(b), str(r)) for a, b, r in schedule)
        if not entries:
            raise RegionScheduleError("empty region schedule")
        if entries[0].start != 0.0 or entries[-1].end != 1.0:
            raise RegionScheduleError(f"region schedule must cover [0, 1], got {entries}")
        for prev, cur in zip(entries, entries[1:]):
            if prev.end != cur.start:
                raise RegionScheduleError(f"region schedule has a gap or overlap at {prev.end} / {cur.start}")
        if any(entry.end <= entry.start for entry in entries):
            raise RegionScheduleError(f"region schedule has an empty entry: {entries}")
        return entries

    def _check_closure(self) -> None:
        ends = self(np.array([0.0, 1.0]))
        diff = ends[1] - ends[0]
        for i, period in enumerate(self.chart.periods):
            if period is not None:
                diff[i] -= period * round(diff[i] / period)
        if np.max(np.abs(diff)) > CLOSURE_TOLERANCE:
            raise OpenPathError(f"{self.name} is flagged closed but its ends differ by {diff}")

    def __call__(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        return np.asarray(self.parametrization(s), dtype=float).reshape(s.shape[0], self.chart.dim)

    def velocity(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=float))
        if self.analytic_velocity is not None:
            return np.asarray(self.analytic_velocity(s), dtype=float).reshape(s.shape[0], self.chart.dim)
        return central_difference(lambda u: self(u[:, 0]), s[:, None], PARAMETER_STEP)[..., 0]

    def with_schedule(self, schedule: Iterable[tuple[float, float, str]]) -> "Pq_Path":
        return Pq_Path(
            self.chart,
            self.parametrization,
            velocity=self.analytic_velocity,
            is_closed=self.is_closed,
            is_smooth_loop=self.is_smooth_loop,
            breakpoints=self.breakpoints,
            region_schedule=schedule,
            name=self.name,
        )

    def schedule_or(self, default_region: str) -> tuple[Pq_Schedule_Entry, ...]:
        if self.region_schedule is not None:
            return self.region_schedule
        return (Pq_Schedule_Entry(0.0, 1.0, default_region),)

    def subintervals(self, s0: float, s1: float, breaks: Iterable[float] = ()) -> list[tuple[float, float]]:
        cuts = sorted({s0, s1, *(b for b in (*self.breakpoints, *breaks) if s0 < b < s1)})
        return [(a, b) for a, b in zip(cuts, cuts[1:]) if b > a]

    def line_integral(
        self,
        form,
        *,
        s0: float = 0.0,
        s1: float = 1.0,
        breaks: Iterable[float] = (),
        gauss_order: int = GAUSS_ORDER,
        trapezoid_nodes: int = TRAPEZOID_NODES,
    ) -> complex:
        """Integral of a 1-form over the parameter interval [s0, s1], split at breakpoints."""
        if form.chart != self.chart:
            raise ChartMismatchError(f"{form!r} lives on {form.chart.name}, the path on {self.chart.name}")
        if form.degree != 1:
            raise DimensionMismatchError(f"curves integrate 1-forms, got degree {form.degree}")
        breaks = tuple(breaks)
        if self.is_smooth_loop and (s0, s1) == (0.0, 1.0) and not breaks:
            nodes, weights = trapezoid_periodic(trapezoid_nodes, 0.0, 1.0)
            return self._quadrature_sum(form, nodes, weights)
        total = 0j
        for a, b in self.subintervals(s0, s1, breaks):
            nodes, weights = gauss_legendre(gauss_order, a, b)
            total += self._quadrature_sum(form, nodes, weights)
        return total

    def _quadrature_sum(self, form, nodes: np.ndarray, weights: np.ndarray) -> complex:
        coords = self(nodes)
        self.chart.validate(coords, what=f"{self.name} quadrature node")
        integrand = np.sum(form.components(coords, is_validate=False) * self.velocity(nodes), axis=1)
        return complex(np.sum(weights * integrand))

    # > Constructors
    @classmethod
    def segment(cls, chart: Pq_Chart, start, end, *, name: str = "segment") -> "Pq_Path":
        start = np.asarray(start, dtype=float)
        end = np.asarray(end, dtype=float)
        delta = end - start
        return cls(
            chart,
            lambda s: start + s[:, None] * delta,
            velocity=lambda s: np.broadcast_to(delta, (s.shape[0], chart.dim)),
            name=name,
        )

    @classmethod
    def polyline(cls, chart: Pq_Chart, vertices, *, is_closed: bool = False, name: str = "polyline") -> "Pq_Path":
        """Piecewise linear path through vertices at equally spaced parameters."""
        vertices = np.asarray(vertices, dtype=float)
        if is_closed:
            vertices = np.vstack([vertices, vertices[:1]])
        nseg = vertices.shape[0] - 1
        if nseg < 1:
            raise ValueError("a polyline needs at least two vertices")

        def locate(s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            scaled = np.clip(s, 0.0, 1.0) * nseg
            idx = np.minimum(np.floor(scaled).astype(int), nseg - 1)
            return idx, scaled - idx

        def parametrization(s: np.ndarray) -> np.ndarray:
            idx, frac = locate(s)
            return vertices[idx] + frac[:, None] * (vertices[idx + 1] - vertices[idx])

        def velocity(s: np.ndarray) -> np.ndarray:
            idx, _ = locate(s)
            return nseg * (vertices[idx + 1] - vertices[idx])

        return cls(
            chart,
            parametrization,
            velocity=velocity,
            is_closed=is_closed,
            breakpoints=[i / nseg for i in range(1, nseg)],
            name=name,
        )

    @classmethod
    def rectangle(cls, chart: Pq_Chart, first: tuple[float, float], second: tuple[float, float]) -> "Pq_Path":
        """Counterclockwise boundary of [a, b] x [c, d] in the first two coordinates."""
        (a, b), (c, d) = first, second
        return cls.polyline(chart, [(a, c), (b, c), (b, d), (a, d)], is_closed=True, name=f"boundary[{a},{b}]x[{c},{d}]")

    @classmethod
    def coordinate_circle(cls, chart: Pq_Chart, axis: int, base, *, turns: int = 1, name: str = "") -> "Pq_Path":
        """Loop running once (or `turns` times) around the periodic coordinate `axis` from `base`."""
        period = chart.periods[axis]
        if period is None:
            raise ValueError(f"coordinate {chart.coord_names[axis]} of {chart.name} is not periodic")
        base = np.asarray(base, dtype=float)
        direction = np.zeros(chart.dim)
        direction[axis] = period * turns
        return cls(
            chart,
            lambda s: base + s[:, None] * direction,
            velocity=lambda s: np.broadcast_to(direction, (s.shape[0], chart.dim)),
            is_smooth_loop=True,
            name=name or f"{chart.coord_names[axis]}-circle@{tuple(float(c) for c in base)}",
        )

    @classmethod
    def latitude(cls, z: float, *, region: str | None = None, chart: Pq_Chart = SPHERE_CYL) -> "Pq_Path":
        path = cls.coordinate_circle(chart, chart.index("theta"), (0.0, z), name=f"latitude(z={z})")
        if region is not None:
            path = path.with_schedule([(0.0, 1.0, region)])
        return path

    @classmethod
    def circle(cls, chart: Pq_Chart, center, radius: float, *, name: str = "") -> "Pq_Path":
        """Counterclockwise circle in the first two coordinates."""
        center = np.asarray(center, dtype=float)
        two_pi = 2 * math.pi

        def parametrization(s: np.ndarray) -> np.ndarray:
            pts = np.broadcast_to(center, (s.shape[0], chart.dim)).copy()
            pts[:, 0] += radius * np.cos(two_pi * s)
            pts[:, 1] += radius * np.sin(two_pi * s)
            return pts

        def velocity(s: np.ndarray) -> np.ndarray:
            vel = np.zeros((s.shape[0], chart.dim))
            vel[:, 0] = -two_pi * radius * np.sin(two_pi * s)
            vel[:, 1] = two_pi * radius * np.cos(two_pi * s)
            return vel

        return cls(
            chart,
            parametrization,
            velocity=velocity,
            is_smooth_loop=True,
            name=name or f"circle(r={radius})",
        )
