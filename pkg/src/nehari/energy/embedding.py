# src/nehari/energy/embedding.py
"""
Discrete embedding and Hoelder constants.

K_m is the sharp constant in ||u||_inf <= K ||u||_{E_p} over zero-boundary
fields at level m. The maximum of |u(x)| at unit energy is the reciprocal of
the minimal energy among fields with u(x) = 1, so K_m(x) = calE_min(x)^{-1/p}.
"""

import logging
from typing import Dict, Iterable, List

import numpy as np
from pydantic import BaseModel, Field
from scipy import sparse

from nehari.energy.forms import EnergyContext, renormalized_energy, restrict, weighted_laplacian
from nehari.energy.harmonic import minimize_crude
from nehari.geometry.gasket import cell_neighborhoods

logger = logging.getLogger(__name__)


def _interior_laplacian(ctx: EnergyContext) -> sparse.csc_matrix:
    g = ctx.graph
    lap = weighted_laplacian(g.edges, np.ones(g.edges.shape[0]), g.n_vertices)
    return restrict(lap, g.interior_ids)


def embedding_profile(ctx: EnergyContext) -> np.ndarray:
    """
    K_m(x) for every vertex (0 on the boundary).

    p = 2: K_m(x)^2 is the x-diagonal of (scale * L_int)^{-1}.
    Other p: one convex minimization per interior vertex, warm-started from
    the p = 2 extremal field.
    """
    g = ctx.graph
    if g.level < 1:
        raise ValueError("the embedding constant needs at least one interior vertex (level >= 1)")
    interior = g.interior_ids
    lap = _interior_laplacian(ctx)
    inverse = np.linalg.inv(lap.toarray())
    profile = np.zeros(g.n_vertices)

    if ctx.p == 2.0:
        profile[interior] = np.sqrt(np.diag(inverse) / ctx.scale)
        return profile

    for k, x in enumerate(interior):
        x0 = np.zeros(g.n_vertices)
        x0[interior] = inverse[:, k] / inverse[k, k]
        free = interior[interior != x]
        result = minimize_crude(g, ctx.model, x0, free)
        profile[x] = (ctx.scale * result.value) ** (-1.0 / ctx.p)
    logger.debug("embedding profile at level %d: max %.6f", g.level, profile.max())
    return profile


def estimate_embedding_K(ctx: EnergyContext) -> float:
    """The discrete sharp embedding constant K_m = max_x K_m(x)."""
    return float(np.max(embedding_profile(ctx)))


class HolderReport(BaseModel):
    """Empirical Hoelder ratios per cell order."""
    per_order: Dict[int, float] = Field(default_factory=dict)
    constant: float = 0.0
    energy: float = 0.0


def holder_constant_check(ctx: EnergyContext, u: np.ndarray, orders: Iterable[int]) -> HolderReport:
    """
    For each order m', the largest |u(x) - u(y)| over x, y in the same or
    adjacent order-m' cells, divided by calE_p(u)^{1/p} r_p^{m'/p}.

    Raises:
        ValueError: u has zero energy
    """
    u = ctx.graph.check_field(u)
    energy = renormalized_energy(ctx, u)
    if energy <= 0.0:
        raise ValueError("Hoelder ratios need a field with positive energy")
    norm = energy ** (1.0 / ctx.p)
    per_order: Dict[int, float] = {}
    for order in orders:
        spans: List[float] = [float(np.ptp(u[group])) for group in cell_neighborhoods(ctx.graph, order)]
        per_order[int(order)] = max(spans) / (norm * ctx.r_p ** (order / ctx.p))
    return HolderReport(
        per_order=per_order,
        constant=max(per_order.values(), default=0.0),
        energy=energy,
    )
