"""
src/dsim/estimation/optimize.py
Derivative-free local minimisers used to refine the index direction.
"""

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Tuple

import numpy as np
from scipy.optimize import minimize

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI_SQUARE = (3 - math.sqrt(5)) / 2


@dataclass(frozen=True)
class LocalMinimum:
    """Best point seen by a local search and the number of evaluations spent."""

    x: np.ndarray
    value: float
    evaluations: int


def golden_section(
    f: Callable[[float], float], a: float, b: float, tol: float, max_iter: int
) -> LocalMinimum:
    """
    Golden-section search for a minimum of f on [a, b].

    The bracket shrinks by 1/phi per iteration until it is narrower than tol or
    max_iter evaluations have been spent. The returned point is the best one
    evaluated, endpoints included.
    """
    a, b = min(a, b), max(a, b)
    best_x, best_f = a, f(a)
    evaluations = 1

    def consider(x: float, fx: float) -> None:
        nonlocal best_x, best_f
        if fx < best_f:
            best_x, best_f = x, fx

    fb = f(b)
    evaluations += 1
    consider(b, fb)

    h = b - a
    c = a + INV_PHI_SQUARE * h
    d = a + INV_PHI * h
    yc, yd = f(c), f(d)
    evaluations += 2
    consider(c, yc)
    consider(d, yd)

    while h > tol and evaluations < max_iter:
        h *= INV_PHI
        if yc < yd:
            b, d, yd = d, c, yc
            c = a + INV_PHI_SQUARE * h
            yc = f(c)
            consider(c, yc)
        else:
            a, c, yc = c, d, yd
            d = a + INV_PHI * h
            yd = f(d)
            consider(d, yd)
        evaluations += 1

    return LocalMinimum(np.array([best_x]), float(best_f), evaluations)


def bounded_simplex(
    f: Callable[[np.ndarray], float],
    start: Sequence[float],
    bounds: Sequence[Tuple[float, float]],
    tol: float,
    max_evaluations: int,
) -> LocalMinimum:
    """
    Nelder-Mead simplex search inside a box.

    The initial simplex steps a quarter of the box width from the start in each coordinate.
    Iteration stops once every vertex lies within tol of the best vertex or the
    evaluation budget is spent; function values play no part in the stopping rule.
    """
    x0 = np.asarray(start, dtype=float)
    lower = np.array([lo for lo, _ in bounds], dtype=float)
    upper = np.array([hi for _, hi in bounds], dtype=float)
    simplex = [x0]
    for i in range(x0.size):
        vertex = x0.copy()
        step = 0.5 * (upper[i] - lower[i]) / 2
        vertex[i] = x0[i] + step if x0[i] + step <= upper[i] else x0[i] - step
        simplex.append(vertex)

    best = {"x": x0, "value": math.inf}

    def tracked(x: np.ndarray) -> float:
        value = float(f(x))
        if value < best["value"]:
            best["x"], best["value"] = np.array(x), value
        return value

    result = minimize(
        tracked,
        x0,
        method="Nelder-Mead",
        bounds=list(zip(lower, upper)),
        options={
            "initial_simplex": np.array(simplex),
            "xatol": tol,
            "fatol": math.inf,
            "maxfev": max_evaluations,
        },
    )
    return LocalMinimum(np.asarray(best["x"]), float(best["value"]), int(result.nfev))
