"""Derivative-free simplex minimization shared by the pulse, unitary and decay fits."""

from __future__ import annotations

import math
from typing import Callable, NamedTuple, Sequence

import numpy as np

REFLECT, EXPAND, CONTRACT, SHRINK = 1.0, 2.0, 0.5, 0.5


class SimplexResult(NamedTuple):
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool


def _initial_simplex(x0: np.ndarray, step) -> np.ndarray:
    k = len(x0)
    if step is None:
        steps = np.where(x0 != 0, 0.05 * np.abs(x0), 0.00025)
    else:
        steps = np.broadcast_to(np.asarray(step, dtype=float), (k,))
    simplex = np.repeat(x0[None, :], k + 1, axis=0)
    simplex[1:] += np.diag(steps)
    return simplex


def _checked(objective, x) -> float:
    value = float(objective(x))
    if math.isnan(value):
        raise ValueError(f"objective returned NaN at {x}")
    return value


def _run(objective, simplex, max_iter, tol_x, tol_f):
    fvals = np.array([_checked(objective, p) for p in simplex])
    for it in range(1, max_iter + 1):
        order = np.argsort(fvals, kind="stable")
        simplex, fvals = simplex[order], fvals[order]
        size = np.max(np.abs(simplex[1:] - simplex[0]))
        spread = np.max(np.abs(fvals[1:] - fvals[0]))
        # Both active tolerances must hold: the spread test alone stops early
        # whenever the simplex straddles the minimum symmetrically.
        if (tol_x <= 0 or size < tol_x) and (tol_f <= 0 or spread < tol_f) and (tol_x > 0 or tol_f > 0):
            return simplex[0], fvals[0], it - 1, True

        centroid = simplex[:-1].mean(axis=0)
        worst = simplex[-1]
        xr = centroid + REFLECT * (centroid - worst)
        fr = _checked(objective, xr)
        if fr < fvals[0]:
            xe = centroid + EXPAND * (xr - centroid)
            fe = _checked(objective, xe)
            simplex[-1], fvals[-1] = (xe, fe) if fe < fr else (xr, fr)
            continue
        if fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
            continue
        if fr < fvals[-1]:
            xc = centroid + CONTRACT * (xr - centroid)
            fc = _checked(objective, xc)
            if fc <= fr:
                simplex[-1], fvals[-1] = xc, fc
                continue
        else:
            xc = centroid + CONTRACT * (worst - centroid)
            fc = _checked(objective, xc)
            if fc < fvals[-1]:
                simplex[-1], fvals[-1] = xc, fc
                continue
        simplex[1:] = simplex[0] + SHRINK * (simplex[1:] - simplex[0])
        fvals[1:] = [_checked(objective, p) for p in simplex[1:]]
    best = int(np.argmin(fvals))
    return simplex[best], fvals[best], max_iter, False


def nelder_mead(
    objective: Callable[[np.ndarray], float],
    x0: Sequence[float],
    *,
    max_iter: int = 2000,
    tol_x: float = 1e-8,
    tol_f: float = 1e-12,
    step=None,
    restarts: int = 0,
) -> SimplexResult:
    """Minimize ``objective`` starting from ``x0``.

    Stops once the simplex is smaller than ``tol_x`` (max coordinate
    distance to the best vertex) and the objective spread is below
    ``tol_f``, or after ``max_iter`` iterations. A tolerance of zero
    switches that test off. With ``restarts`` > 0 a fresh simplex
    is built around the optimum and the search repeated, which guards
    against premature collapse of the simplex. A NaN objective value
    raises ``ValueError``.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float)).copy()
    if x0.ndim != 1 or len(x0) < 1:
        raise ValueError("x0 must be a non-empty vector")
    if not np.all(np.isfinite(x0)):
        raise ValueError("x0 must be finite")

    x, fx, total, converged = _run(objective, _initial_simplex(x0, step), max_iter, tol_x, tol_f)
    for _ in range(restarts):
        budget = max_iter - total
        if budget <= 0:
            break
        x_new, f_new, used, converged = _run(objective, _initial_simplex(x, step), budget, tol_x, tol_f)
        total += used
        if not f_new < fx:
            break
        moved = np.max(np.abs(x_new - x))
        x, fx = x_new, f_new
        if moved < tol_x:
            break
    return SimplexResult(np.asarray(x, dtype=float), float(fx), total, converged)
