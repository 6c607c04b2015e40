#!/usr/bin/env python3

import logging
from collections.abc import Callable
from typing import TypeVar

import numpy as np

from prequant.pq_exceptions import ChartMismatchError, ContractError, DomainError
from prequant.pq_geometry.pq_charts import Pq_Chart
from prequant.pq_geometry.pq_fields import Pq_Scalar_Field, Pq_Smooth_Map
from prequant.pq_geometry.pq_forms import Pq_Differential_Form, pullback_form

MIN_CIRCLE_NODES = 8
AVERAGING_NODES = 16
PRESERVE_SAMPLES = 64

Averageable = TypeVar("Averageable", Pq_Scalar_Field, Pq_Differential_Form)


class Pq_Circle_Action:
    def __init__(self, chart: Pq_Chart, family: Callable[[float], Pq_Smooth_Map], *, name: str = "") -> None:
        """
        An action of the circle R/2piZ on a chart.

        :param family: group element g in [0, 2 pi) -> the map alpha_g, which must preserve the chart
        """
        self.chart = chart
        self.family = family
        self.name = name or f"S1 action on {chart.name}"

    def __repr__(self) -> str:
        return f"Pq_Circle_Action({self.name})"

    def __call__(self, g: float) -> Pq_Smooth_Map:
        m = self.family(float(g))
        if m.source != self.chart or m.target != self.chart:
            raise ChartMismatchError(f"{m!r} does not preserve {self.chart.name}")
        return m

    def check_preserves_chart(self, pts, elements) -> None:
        for g in elements:
            images = self(g)(pts)
            if not self.chart.contains(images).all():
                raise DomainError(f"{self.name} at g = {g} leaves the bounds of {self.chart.name}")


def rotation_action(chart: Pq_Chart, axis: str = "theta") -> Pq_Circle_Action:
    """theta -> theta + g along a periodic coordinate of period 2 pi."""
    index = chart.index(axis)
    period = chart.periods[index]
    if period is None or not np.isclose(period, 2 * np.pi):
        raise ContractError(f"{axis} is not a 2 pi periodic coordinate of {chart.name}")

    def family(g: float) -> Pq_Smooth_Map:
        offset = np.zeros(chart.dim)
        offset[index] = g
        return Pq_Smooth_Map.translation(chart, offset)

    return Pq_Circle_Action(chart, family, name=f"rotation in {axis} on {chart.name}")


def _group_elements(nodes: int) -> np.ndarray:
    return 2 * np.pi * np.arange(nodes) / nodes


def _average(action: Pq_Circle_Action, obj: Averageable, elements: np.ndarray) -> Averageable:
    action.check_preserves_chart(action.chart.sample(PRESERVE_SAMPLES, np.random.default_rng(0)), elements)
    maps = [action(g) for g in elements]
    weight = 1.0 / len(maps)
    if isinstance(obj, Pq_Differential_Form):
        if obj.chart != action.chart:
            raise ChartMismatchError(f"{obj!r} does not live on {action.chart.name}")
        total = pullback_form(maps[0], obj)
        for m in maps[1:]:
            total = total + pullback_form(m, obj)
        averaged = total.scale(weight)
        averaged.name = f"avg({obj.name})"
        return averaged

    f = obj
    gradient = None
    if f.has_gradient and all(m.has_jacobian for m in maps):

        def gradient(pts: np.ndarray) -> np.ndarray:
            return weight * sum(np.einsum("ni,nij->nj", f.gradient(m(pts)), m.jacobian(pts)) for m in maps)

    def evaluator(pts: np.ndarray) -> np.ndarray:
        return weight * sum(f(m(pts)) for m in maps)

    return Pq_Scalar_Field(evaluator, reality=f.reality, gradient=gradient, name=f"avg({f.name})")


def average_over_circle(action: Pq_Circle_Action, obj: Averageable, nodes: int = AVERAGING_NODES) -> Averageable:
    """
    Haar average (1/2pi) int alpha_g^* obj dg by the trapezoid rule on equally spaced g.

    Exact for objects whose dependence on g is a trigonometric polynomial of degree < nodes.
    """
    if nodes < MIN_CIRCLE_NODES:
        raise ValueError(f"circle averaging needs at least {MIN_CIRCLE_NODES} nodes, got {nodes}")
    logging.debug(f"Averaging {obj!r} over {action.name} with {nodes} nodes")
    return _average(action, obj, _group_elements(nodes))


def average_over_cyclic_group(action: Pq_Circle_Action, obj: Averageable, order: int) -> Averageable:
    """Exact average over the cyclic subgroup of order `order`, elements 2 pi j / order."""
    if order < 1:
        raise ValueError(f"group order must be positive, got {order}")
    return _average(action, obj, _group_elements(order))


def invariance_residual(action: Pq_Circle_Action, obj: Averageable, pts, elements) -> float:
    """sup over pts and the given g of |alpha_g^* obj - obj|."""
    residual = 0.0
    for g in elements:
        m = action(g)
        if isinstance(obj, Pq_Differential_Form):
            diff = (pullback_form(m, obj) - obj).sup_norm(pts)
        else:
            diff = float(np.max(np.abs(obj(m(pts)) - obj(pts)), initial=0.0))
        residual = max(residual, diff)
    return residual
