#!/usr/bin/env python3

import logging
import math
from typing import NamedTuple

import numpy as np

from prequant.pq_exceptions import DomainError

# Margin kept away from z = +-1 on the cylindrical sphere chart
POLE_BAND = 1e-3
# Slack for round-off when testing closed bounds
BOUND_SLACK = 1e-12


class Pq_Chart:
    def __init__(
        self,
        name: str,
        coord_names: tuple[str, ...],
        bounds: tuple[tuple[float, float], ...],
        *,
        periodic: tuple[bool, ...] | None = None,
        exclusion_band: tuple[float | None, ...] | None = None,
        ball_radius: float | None = None,
        orientation: int = 1,
        genus: int | None = None,
    ) -> None:
        """
        :param name: identifier, charts compare equal when all fields agree
        :param coord_names: one name per coordinate
        :param bounds: closed interval per coordinate, for periodic coordinates the interval is one period
        :param periodic: which coordinates are angles
        :param exclusion_band: per coordinate margin kept away from both interval ends
        :param ball_radius: when set, coordinates are further restricted to the Euclidean ball of this radius
        :param orientation: sign of the coordinate-order volume form in the fixed orientation of the manifold
        :param genus: genus of the closed surface the chart covers, None if the chart is not a closed surface
        """
        dim = len(coord_names)
        if dim not in (1, 2, 4):
            raise ValueError(f"chart dimension must be 1, 2 or 4, got {dim}")
        if len(bounds) != dim:
            raise ValueError(f"expected {dim} coordinate intervals, got {len(bounds)}")
        periodic = periodic if periodic is not None else (False,) * dim
        exclusion_band = exclusion_band if exclusion_band is not None else (None,) * dim
        for (lo, hi), is_periodic, band in zip(bounds, periodic, exclusion_band):
            if not hi > lo:
                raise ValueError(f"empty coordinate interval [{lo}, {hi}]")
            if band is not None and not 0 < band < (hi - lo) / 2:
                raise ValueError(f"exclusion band {band} must lie in (0, {(hi - lo) / 2})")
            if is_periodic and band is not None:
                raise ValueError("periodic coordinates cannot carry an exclusion band")
        if orientation not in (1, -1):
            raise ValueError(f"orientation must be +1 or -1, got {orientation}")

        self.name = name
        self.coord_names = tuple(coord_names)
        self.bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        self.periodic = tuple(periodic)
        self.exclusion_band = tuple(exclusion_band)
        self.ball_radius = ball_radius
        self.orientation = orientation
        self.genus = genus

    @property
    def dim(self) -> int:
        return len(self.coord_names)

    @property
    def periods(self) -> tuple[float | None, ...]:
        return tuple((hi - lo) if is_periodic else None for (lo, hi), is_periodic in zip(self.bounds, self.periodic))

    @property
    def is_star_shaped(self) -> bool:
        # Balls and boxes around the origin without periodic directions
        return not any(self.periodic) and all(lo < 0 < hi for lo, hi in self.bounds)

    @property
    def is_closed_surface(self) -> bool:
        return self.genus is not None

    def index(self, coord_name: str) -> int:
        try:
            return self.coord_names.index(coord_name)
        except ValueError:
            raise ValueError(f"{self.name} has no coordinate {coord_name!r}") from None

    def key(self) -> tuple:
        return (
            self.name,
            self.coord_names,
            self.bounds,
            self.periodic,
            self.exclusion_band,
            self.ball_radius,
            self.orientation,
        )

    def __eq__(self, other) -> bool:
        return isinstance(other, Pq_Chart) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"Pq_Chart({self.name}, coords={self.coord_names})"

    def reduce(self, coords) -> np.ndarray:
        """Reduce periodic coordinates into their fundamental interval [lo, hi)."""
        arr = np.array(coords, dtype=float, ndmin=2)
        for i, ((lo, hi), is_periodic) in enumerate(zip(self.bounds, self.periodic)):
            if is_periodic:
                arr[:, i] = lo + np.mod(arr[:, i] - lo, hi - lo)
        return arr

    def contains(self, coords, *, is_check_band: bool = True) -> np.ndarray:
        arr = self.reduce(coords)
        mask = np.ones(arr.shape[0], dtype=bool)
        for i, ((lo, hi), is_periodic, band) in enumerate(zip(self.bounds, self.periodic, self.exclusion_band)):
            if is_periodic:
                continue
            margin = band if (is_check_band and band is not None) else 0.0
            mask &= arr[:, i] >= lo + margin - BOUND_SLACK
            mask &= arr[:, i] <= hi - margin + BOUND_SLACK
        if self.ball_radius is not None:
            mask &= np.linalg.norm(arr, axis=1) <= self.ball_radius + BOUND_SLACK
        mask &= np.all(np.isfinite(arr), axis=1)
        return mask

    def validate(self, coords, *, is_check_band: bool = True, what: str = "evaluation") -> None:
        mask = self.contains(coords, is_check_band=is_check_band)
        if not mask.all():
            bad = np.array(coords, dtype=float, ndmin=2)[~mask][0]
            raise DomainError(f"{what} outside {self.name}: point {tuple(float(c) for c in bad)}")

    def sample(self, n: int, rng: np.random.Generator, *, shrink: float = 0.9) -> np.ndarray:
        """
        Deterministic (given rng) sample points away from the chart's edges and pole bands.

        :param shrink: fraction of each non-periodic interval (or of the ball radius) that samples may occupy
        """
        if self.ball_radius is not None:
            directions = rng.standard_normal((n, self.dim))
            directions /= np.linalg.norm(directions, axis=1, keepdims=True)
            radii = self.ball_radius * shrink * rng.random(n) ** (1.0 / self.dim)
            return directions * radii[:, None]

        columns = []
        for (lo, hi), is_periodic, band in zip(self.bounds, self.periodic, self.exclusion_band):
            if is_periodic:
                columns.append(rng.uniform(lo, hi, n))
                continue
            mid, half = (lo + hi) / 2, (hi - lo) / 2 * shrink
            if band is not None:
                half = min(half, (hi - lo) / 2 - band)
            columns.append(rng.uniform(mid - half, mid + half, n))
        return np.stack(columns, axis=1)

    def total_region(self):
        from prequant.pq_geometry.pq_quadrature import Pq_Region

        if self.ball_radius is not None:
            raise DomainError(f"{self.name} is a ball, its total region is not a coordinate box")
        return Pq_Region(self, self.bounds, orientation=self.orientation)

    def point(self, *coords: float) -> "Pq_Point":
        return Pq_Point(self, coords)


class Pq_Point(NamedTuple):
    chart: Pq_Chart
    coords: tuple[float, ...]

    def validated(self) -> "Pq_Point":
        if len(self.coords) != self.chart.dim:
            raise DomainError(f"{self.chart.name} points need {self.chart.dim} coordinates, got {self.coords}")
        self.chart.validate([self.coords], what="point")
        return self

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=float)


def disk_chart(radius: float = 1.0, dim: int = 2, name: str = "disk") -> Pq_Chart:
    """
    Euclidean ball of the given radius. In dimension 4 the coordinates are ordered
    (x1, x2, y1, y2) so that the standard form is dx1^dy1 + dx2^dy2.
    """
    if dim == 2:
        coord_names: tuple[str, ...] = ("x", "y")
    elif dim == 4:
        coord_names = ("x1", "x2", "y1", "y2")
    else:
        raise ValueError(f"disk charts are 2 or 4 dimensional, got {dim}")
    return Pq_Chart(name, coord_names, ((-radius, radius),) * dim, ball_radius=radius)


def sphere_chart(pole_band: float = POLE_BAND) -> Pq_Chart:
    # dz^dtheta is the positive orientation, i.e. the opposite of coordinate order (theta, z)
    return Pq_Chart(
        "sphere_cyl",
        ("theta", "z"),
        ((0.0, 2 * math.pi), (-1.0, 1.0)),
        periodic=(True, False),
        exclusion_band=(None, pole_band),
        orientation=-1,
        genus=0,
    )


def torus_chart() -> Pq_Chart:
    return Pq_Chart(
        "torus",
        ("theta1", "theta2"),
        ((0.0, 2 * math.pi), (0.0, 2 * math.pi)),
        periodic=(True, True),
        genus=1,
    )


def torus4_chart() -> Pq_Chart:
    """Product of two tori, coordinates paired (theta1, theta2) and (theta3, theta4)."""
    return Pq_Chart(
        "torus4",
        ("theta1", "theta2", "theta3", "theta4"),
        ((0.0, 2 * math.pi),) * 4,
        periodic=(True,) * 4,
    )


def circle_chart() -> Pq_Chart:
    return Pq_Chart("circle", ("theta",), ((0.0, 2 * math.pi),), periodic=(True,))


def rectangle_chart(
    name: str,
    coord_names: tuple[str, ...],
    bounds: tuple[tuple[float, float], ...],
    periodic: tuple[bool, ...] | None = None,
) -> Pq_Chart:
    logging.debug(f"Creating rectangle chart {name} with bounds {bounds}")
    return Pq_Chart(name, coord_names, bounds, periodic=periodic)


DISK = disk_chart()
SPHERE_CYL = sphere_chart()
TORUS = torus_chart()
TORUS4 = torus4_chart()
CIRCLE = circle_chart()
