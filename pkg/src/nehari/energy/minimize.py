# src/nehari/energy/minimize.py
"""
Inner convex minimizer.

Descent on the free coordinates of a convex objective with an Armijo
backtracking line search. The search direction is the gradient
preconditioned by an SPD metric (typically the regularized Hessian, which
makes the iteration a damped Newton method); the objective itself is never
regularized, so the minimizer is exact.
"""

import logging
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.sparse import spmatrix
from scipy.sparse.linalg import spsolve

logger = logging.getLogger(__name__)


class ConvexResult(BaseModel):
    """Outcome of minimize_convex."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    x: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    converged: bool


class LineSearch(BaseModel):
    """Armijo backtracking parameters."""
    armijo: float = Field(1e-4, gt=0, lt=1)
    shrink: float = Field(0.5, gt=0, lt=1)
    initial_step: float = Field(1.0, gt=0)
    max_backtracks: int = Field(60, ge=1)


def backtrack(
    value: Callable[[float], Optional[float]],
    f0: float,
    slope: float,
    search: LineSearch,
):
    """
    Shrink the step until value(step) <= f0 - armijo * step * slope.

    value(step) may return None for an inadmissible trial point.
    Returns (step, new_value) or (None, None) when no step is accepted.
    """
    step = search.initial_step
    for _ in range(search.max_backtracks):
        trial = value(step)
        if trial is not None and trial <= f0 - search.armijo * step * slope:
            return step, trial
        step *= search.shrink
    return None, None


def minimize_convex(
    value: Callable[[np.ndarray], float],
    gradient: Callable[[np.ndarray], np.ndarray],
    metric: Callable[[np.ndarray], spmatrix],
    x0: np.ndarray,
    free: np.ndarray,
    grad_tol: float = 1e-10,
    max_iter: int = 100_000,
    search: Optional[LineSearch] = None,
    stall_rtol: float = 1e-15,
    stall_patience: int = 25,
) -> ConvexResult:
    """
    Minimize a convex function over the coordinates listed in `free`.

    Stops when the gradient sup-norm drops below grad_tol (converged), or
    when the objective has not decreased by more than stall_rtol * |f| for
    stall_patience iterations in a row, or at max_iter. The last two return
    the best iterate with converged=False; callers decide whether the
    reached gradient norm is good enough.

    Args:
        value: objective on the full vector
        gradient: full gradient; only free entries are used
        metric: SPD matrix on the free coordinates at x
        x0: starting vector, fixed coordinates keep their values
        free: indices of the optimized coordinates
    """
    search = search or LineSearch()
    x = np.array(x0, dtype=float)
    f = value(x)
    if free.size == 0:
        return ConvexResult(x=x, value=f, grad_norm=0.0, iterations=0, converged=True)

    g = gradient(x)[free]
    gnorm = float(np.max(np.abs(g)))
    stalled = 0
    for it in range(max_iter):
        if gnorm < grad_tol:
            return ConvexResult(x=x, value=f, grad_norm=gnorm, iterations=it, converged=True)
        if stalled >= stall_patience:
            logger.debug("objective stagnant at gradient norm %.3e after %d iterations", gnorm, it)
            return ConvexResult(x=x, value=f, grad_norm=gnorm, iterations=it, converged=False)

        d = np.atleast_1d(spsolve(metric(x), g))
        slope = float(g @ d)
        if not np.isfinite(slope) or slope <= 0.0:
            d = g
            slope = float(g @ g)

        def trial_value(step: float) -> float:
            y = x.copy()
            y[free] -= step * d
            return value(y)

        step, f_new = backtrack(trial_value, f, slope, search)
        if step is None:
            # Below the resolution of the objective; accept the full step if
            # it still reduces the gradient.
            y = x.copy()
            y[free] -= d
            g_new = gradient(y)[free]
            g_new_norm = float(np.max(np.abs(g_new)))
            if g_new_norm < gnorm:
                x, f, g, gnorm = y, value(y), g_new, g_new_norm
                stalled += 1
                continue
            logger.debug("line search stalled at gradient norm %.3e", gnorm)
            return ConvexResult(x=x, value=f, grad_norm=gnorm, iterations=it, converged=False)

        stalled = stalled + 1 if f - f_new <= stall_rtol * abs(f) else 0
        x[free] -= step * d
        f = f_new
        g = gradient(x)[free]
        gnorm = float(np.max(np.abs(g)))

    logger.warning("convex minimizer hit the %d iteration cap at gradient norm %.3e", max_iter, gnorm)
    return ConvexResult(x=x, value=f, grad_norm=gnorm, iterations=max_iter, converged=gnorm < grad_tol)
