#!/usr/bin/env python3

from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from prequant.pq_exceptions import RegionEscapeError
from prequant.pq_geometry.pq_charts import BOUND_SLACK, Pq_Chart

GAUSS_ORDER = 32
TRAPEZOID_NODES = 256
RADIAL_NODES = 64


@lru_cache(maxsize=32)
def _legendre_reference(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = roots_legendre(order)
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return nodes, weights


def gauss_legendre(order: int, a: float = 0.0, b: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped from [-1, 1] onto [a, b]."""
    if order < 1:
        raise ValueError(f"quadrature order must be positive, got {order}")
    nodes, weights = _legendre_reference(order)
    half = (b - a) / 2
    return a + half * (nodes + 1.0), half * weights


def trapezoid_periodic(nodes: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Equispaced nodes on [a, b) with equal weights, exact for trigonometric polynomials of degree < nodes."""
    if nodes < 1:
        raise ValueError(f"trapezoid rule needs at least one node, got {nodes}")
    h = (b - a) / nodes
    return a + h * np.arange(nodes), np.full(nodes, h)


class Pq_Region:
    def __init__(self, chart: Pq_Chart, bounds, *, orientation: int = 1) -> None:
        """
        Axis-aligned box in chart coordinates.

        :param bounds: one (lo, hi) pair per coordinate
        :param orientation: +1 integrates against the coordinate-order volume form, -1 against its opposite
        """
        bounds = tuple((float(lo), float(hi)) for lo, hi in bounds)
        if len(bounds) != chart.dim:
            raise RegionEscapeError(f"{chart.name} regions need {chart.dim} intervals, got {len(bounds)}")
        if orientation not in (1, -1):
            raise ValueError(f"orientation must be +1 or -1, got {orientation}")
        for (lo, hi), (clo, chi), period in zip(bounds, chart.bounds, chart.periods):
            if not hi > lo:
                raise RegionEscapeError(f"empty interval [{lo}, {hi}]")
            if period is None:
                if lo < clo - BOUND_SLACK or hi > chi + BOUND_SLACK:
                    raise RegionEscapeError(f"[{lo}, {hi}] escapes the chart interval [{clo}, {chi}]")
            elif hi - lo > period + BOUND_SLACK:
                raise RegionEscapeError(f"[{lo}, {hi}] is longer than the period {period}")
        if chart.ball_radius is not None:
            corners = np.array(np.meshgrid(*bounds, indexing="ij")).reshape(chart.dim, -1).T
            if np.any(np.linalg.norm(corners, axis=1) > chart.ball_radius + BOUND_SLACK):
                raise RegionEscapeError(f"box {bounds} is not contained in the ball of radius {chart.ball_radius}")
        self.chart = chart
        self.bounds = bounds
        self.orientation = orientation

    def __repr__(self) -> str:
        return f"Pq_Region({self.chart.name}, {self.bounds}, orientation={self.orientation})"

    def is_full_period(self, i: int) -> bool:
        period = self.chart.periods[i]
        lo, hi = self.bounds[i]
        return period is not None and abs((hi - lo) - period) <= BOUND_SLACK

    def rule(self, gauss_order: int = GAUSS_ORDER, trapezoid_nodes: int = TRAPEZOID_NODES) -> tuple[np.ndarray, np.ndarray]:
        """Tensor-product nodes (m, dim) and weights (m,), trapezoid along full periods, Gauss-Legendre elsewhere."""
        axes_nodes, axes_weights = [], []
        for i, (lo, hi) in enumerate(self.bounds):
            if self.is_full_period(i):
                nodes, weights = trapezoid_periodic(trapezoid_nodes, lo, hi)
            else:
                nodes, weights = gauss_legendre(gauss_order, lo, hi)
            axes_nodes.append(nodes)
            axes_weights.append(weights)
        grids = np.meshgrid(*axes_nodes, indexing="ij")
        weight_grids = np.meshgrid(*axes_weights, indexing="ij")
        points = np.stack([g.ravel() for g in grids], axis=1)
        weights = np.prod(np.stack([w.ravel() for w in weight_grids], axis=1), axis=1)
        return points, weights
