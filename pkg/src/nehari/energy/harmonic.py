# src/nehari/energy/harmonic.py
"""
p-harmonic extension and the renormalizing factor r_p.

For p = 2 one level of harmonic extension is the explicit 2/5-2/5-1/5 rule.
For other exponents the extension is the minimizer of the crude energy with
the coarse values held fixed, found by the damped Newton iteration in
nehari.energy.minimize; the 2/5 rule then serves as the warm start.
"""

import logging
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, Field

from nehari.core.errors import ConvergenceError
from nehari.core.settings import get_settings
from nehari.energy.forms import (
    crude_energy_of,
    crude_gradient_of,
    edge_differences,
    hessian_weights,
    restrict,
    weighted_laplacian,
)
from nehari.energy.minimize import ConvexResult, minimize_convex
from nehari.energy.model import ApModel
from nehari.geometry.gasket import DEFAULT_CORNERS, GasketGraph, cached_gasket

logger = logging.getLogger(__name__)

# Generic, non-symmetric boundary data for the ratio sequence.
RP_BOUNDARY_DATA = (0.0, 0.5, 1.0)

# (i, j, l): midpoint of edge (i, j) and the opposite corner l.
_MIDPOINT_RULE = ((0, 1, 2), (1, 2, 0), (0, 2, 1))


def prolong_once(coarse: GasketGraph, fine: GasketGraph, values: np.ndarray) -> np.ndarray:
    """
    Extend a level-m field to level m+1 by the p = 2 harmonic rule.

    The new vertex on edge (i, j) of a cell gets (2 a_i + 2 a_j + a_l) / 5.
    """
    if fine.level != coarse.level + 1:
        raise ValueError(f"expected consecutive levels, got {coarse.level} and {fine.level}")
    values = coarse.check_field(values, "coarse field")
    out = np.empty(fine.n_vertices)
    out[fine.embed(coarse)] = values
    a = values[coarse.cells]
    first_child = 3 * np.arange(coarse.n_cells)
    for i, j, l in _MIDPOINT_RULE:
        mid = fine.cells[first_child + i, j]
        out[mid] = (2.0 * a[:, i] + 2.0 * a[:, j] + a[:, l]) / 5.0
    return out


def prolong(values: np.ndarray, from_level: int, to_level: int, corners=DEFAULT_CORNERS) -> np.ndarray:
    """Repeated p = 2 harmonic extension from from_level to to_level."""
    out = np.asarray(values, dtype=float)
    for k in range(from_level, to_level):
        out = prolong_once(cached_gasket(k, corners), cached_gasket(k + 1, corners), out)
    return out


def _newton_floor(p: float) -> float:
    # For p > 2 the Hessian of |d|^p vanishes at d = 0; floor it near 1e-6
    # of its largest weight.
    if p > 2.0:
        return max(1e-6 ** (1.0 / (p - 2.0)), 1e-12)
    return 1e-3


def minimize_crude(
    graph: GasketGraph,
    model: ApModel,
    x0: np.ndarray,
    free: np.ndarray,
    grad_tol: float = 1e-10,
    max_iter: int = 100_000,
    accept_rtol: float = 1e-7,
) -> ConvexResult:
    """
    Minimize the crude energy over the vertices in `free`, all others fixed.

    grad_tol and accept_rtol are relative to the largest edge flux
    p |d|^{p-1} of x0, so the same tolerances serve every level. A run that
    stops above grad_tol is kept with a warning while its gradient stays
    below accept_rtol.

    Raises:
        ConvergenceError: the gradient is still above accept_rtol when the
            minimizer stops
    """
    n = graph.n_vertices
    floor = _newton_floor(model.p)
    flux = np.abs(model.edge_derivative(edge_differences(graph, np.asarray(x0, dtype=float))))
    flux_scale = float(np.max(flux)) if flux.size and np.max(flux) > 0.0 else 1.0

    def metric(x: np.ndarray):
        w = hessian_weights(model, edge_differences(graph, x), rel_floor=floor)
        return restrict(weighted_laplacian(graph.edges, w, n), free)

    result = minimize_convex(
        value=lambda x: crude_energy_of(graph, model, x),
        gradient=lambda x: crude_gradient_of(graph, model, x),
        metric=metric,
        x0=x0,
        free=free,
        grad_tol=grad_tol * flux_scale,
        max_iter=max_iter,
    )
    if not result.converged:
        if result.grad_norm > accept_rtol * flux_scale:
            raise ConvergenceError(
                f"crude energy minimization stopped at gradient norm {result.grad_norm:.3e} "
                f"(level {graph.level}, p={model.p:g})",
                best=result.x,
                residual=result.grad_norm,
            )
        logger.warning(
            "crude energy minimization stopped at relative gradient norm %.3e (level %d, p=%g)",
            result.grad_norm / flux_scale, graph.level, model.p,
        )
    return result


def p_harmonic_extension(
    model: ApModel,
    values: Sequence[float],
    from_level: int = 0,
    to_level: int = 1,
    corners=DEFAULT_CORNERS,
) -> np.ndarray:
    """
    Extend a level-from_level field to the crude-energy minimizing field at
    to_level that agrees with it on the coarse vertices.

    Args:
        model: cell energy
        values: one value per level-from_level vertex (3 boundary values at level 0)

    Raises:
        ValueError: to_level < from_level
        ConvergenceError: inner minimizer stopped short of its tolerance
    """
    if to_level < from_level:
        raise ValueError(f"to_level {to_level} is below from_level {from_level}")
    coarse = cached_gasket(from_level, corners)
    values = coarse.check_field(values, "extension data")
    if to_level == from_level:
        return values.copy()
    if model.p == 2.0:
        return prolong(values, from_level, to_level, corners)

    # Multilevel warm start: minimize at every intermediate level with the
    # original coarse vertices held fixed, then prolong.
    current = values
    for k in range(from_level + 1, to_level + 1):
        fine = cached_gasket(k, corners)
        x0 = prolong_once(cached_gasket(k - 1, corners), fine, current)
        fixed = np.zeros(fine.n_vertices, dtype=bool)
        fixed[fine.embed(coarse)] = True
        current = minimize_crude(fine, model, x0, np.flatnonzero(~fixed)).x
    return current


class RpEstimate(BaseModel):
    """Result of the ratio iteration for r_p."""
    p: float
    r_p: float = Field(..., description="Last successive energy ratio")
    spread: float = Field(..., description="|last ratio - previous ratio|")
    ratios: List[float]
    energies: List[float]
    levels_used: int
    converged: bool
    extrapolated: Optional[float] = Field(
        None, description="Aitken limit of the last three ratios, when they contract monotonically"
    )

    @property
    def best(self) -> float:
        """r_p when converged, else the extrapolated limit if there is one."""
        if self.converged or self.extrapolated is None:
            return self.r_p
        return self.extrapolated


def aitken_limit(seq: Sequence[float], max_contraction: float = 0.9) -> Optional[float]:
    """
    Aitken delta-squared limit of the last three terms.

    None unless the last two differences share a sign and shrink by a
    factor of at most max_contraction, so the correction never exceeds
    max_contraction / (1 - max_contraction) times the last difference.
    """
    if len(seq) < 3:
        return None
    d1 = seq[-2] - seq[-3]
    d2 = seq[-1] - seq[-2]
    if d1 == 0.0 or d2 == 0.0:
        return None
    ratio = d2 / d1
    if not 0.0 < ratio <= max_contraction:
        return None
    return float(seq[-1] + d2 * ratio / (1.0 - ratio))


def estimate_rp(
    model: ApModel,
    max_level: Optional[int] = None,
    tol: Optional[float] = None,
    boundary_data: Tuple[float, float, float] = RP_BOUNDARY_DATA,
) -> RpEstimate:
    """
    Estimate r_p as the limit of rho_m / rho_{m-1}, rho_m being the minimal
    level-m crude energy among extensions of the boundary data.

    Stops once two successive ratios agree to tol; otherwise returns the
    last ratio with converged=False, plus the Aitken limit of the tail.
    """
    settings = get_settings()
    max_level = settings.rp_max_level if max_level is None else max_level
    tol = settings.rp_tol if tol is None else tol
    if max_level < 2:
        raise ValueError(f"max_level must be at least 2, got {max_level}")

    level0 = cached_gasket(0)
    field = np.asarray(boundary_data, dtype=float)
    energies = [crude_energy_of(level0, model, field)]
    if energies[0] <= 0.0:
        raise ValueError("boundary data must not be constant")
    ratios: List[float] = []
    spread = float("inf")

    for m in range(1, max_level + 1):
        coarse, fine = cached_gasket(m - 1), cached_gasket(m)
        x0 = prolong_once(coarse, fine, field)
        if model.p == 2.0:
            field = x0
        else:
            field = minimize_crude(fine, model, x0, fine.interior_ids).x
        energies.append(crude_energy_of(fine, model, field))
        ratios.append(energies[-1] / energies[-2])
        if len(ratios) >= 2:
            spread = abs(ratios[-1] - ratios[-2])
            logger.debug("r_p ratio at level %d: %.12f (spread %.3e)", m, ratios[-1], spread)
            if spread < tol:
                break

    converged = spread < tol
    extrapolated = None if converged else aitken_limit(ratios)
    if not converged:
        logger.warning(
            "r_p estimate for p=%g not converged: spread %.3e > %.1e (Aitken limit %s)",
            model.p, spread, tol, "n/a" if extrapolated is None else f"{extrapolated:.10f}",
        )
    return RpEstimate(
        p=model.p,
        r_p=ratios[-1],
        spread=spread,
        ratios=ratios,
        energies=energies,
        levels_used=len(ratios),
        converged=converged,
        extrapolated=extrapolated,
    )


@lru_cache(maxsize=16)
def default_rp(p: float) -> float:
    """
    r_p used when an EnergyContext is built without one; exact 3/5 at p = 2.
    An unconverged ratio sequence contributes its Aitken limit when defined.
    """
    if p == 2.0:
        return 0.6
    estimate = estimate_rp(ApModel(p=p))
    value = estimate.best
    if not 0.0 < value < 1.0:
        raise ValueError(f"estimated r_p={value} for p={p} is outside (0, 1)")
    return value
