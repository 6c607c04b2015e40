#!/usr/bin/env python3

import math
from collections.abc import Iterable

import numpy as np

# For all the procedures in the command line layer, return a tuple as the result
# The first element bool indicates whether the procedure succeeds
# The second element is the error message if it fails.
Pq_Procedure_Result = tuple[bool, str | None]

TWO_PI = 2.0 * math.pi


def sup_norm(values) -> float:
    """
    Largest absolute entry of an array-like, 0.0 for empty input.

    >>> sup_norm([1.0, -3.0, 2.0])
    3.0
    >>> sup_norm([])
    0.0
    """
    arr = np.asarray(values)
    if arr.size == 0:
        return 0.0
    return float(np.max(np.abs(arr)))


def wrap_phase(phase):
    """
    Map phases into [-pi, pi).

    >>> float(wrap_phase(3 * math.pi))
    -3.141592653589793
    """
    return (np.asarray(phase) + math.pi) % TWO_PI - math.pi


def nearest_multiple(value: float, unit: float = TWO_PI) -> int:
    """
    >>> nearest_multiple(6.3)
    1
    >>> nearest_multiple(-0.1)
    0
    """
    return int(round(value / unit))


def distance_to_lattice(value: float, unit: float = TWO_PI) -> float:
    """
    >>> round(distance_to_lattice(2 * math.pi + 0.25), 12)
    0.25
    """
    return abs(value - unit * nearest_multiple(value, unit))


def dedupe_sorted(values: Iterable[float], tol: float) -> list[float]:
    """
    Sort and drop entries closer than tol to their predecessor.

    >>> dedupe_sorted([0.5, 0.0, 0.5 + 1e-12, -0.5], 1e-8)
    [-0.5, 0.0, 0.5]
    """
    result: list[float] = []
    for value in sorted(values):
        if result and abs(value - result[-1]) <= tol:
            continue
        result.append(value)
    return result


def parse_float_list(s: str) -> tuple[float, ...]:
    """
    >>> parse_float_list("0, 0.5,1")
    (0.0, 0.5, 1.0)
    >>> parse_float_list("")
    ()
    """
    return tuple(float(item) for item in s.split(",") if item.strip())
