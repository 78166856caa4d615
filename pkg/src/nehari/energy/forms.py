# src/nehari/energy/forms.py
"""
Crude and renormalized p-energies on a level-m graph.

E_p^{(m)}(u) = sum over cells of A_p on the cell values
           = sum over edges of |u(x) - u(y)|^p          (each edge is in one cell)
calE_p^{(m)}(u) = r_p^{-m} E_p^{(m)}(u)
"""

from functools import cached_property
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy import sparse
from scipy.sparse.linalg import splu, spsolve

from nehari.energy.model import ApModel
from nehari.geometry.gasket import GasketGraph


def edge_differences(graph: GasketGraph, u: np.ndarray) -> np.ndarray:
    e = graph.edges
    return u[e[:, 0]] - u[e[:, 1]]


def crude_energy_of(graph: GasketGraph, model: ApModel, u: np.ndarray) -> float:
    """Level-m crude energy, summed over edges in a fixed order."""
    return float(np.sum(model.edge_term(edge_differences(graph, u))))


def crude_gradient_of(graph: GasketGraph, model: ApModel, u: np.ndarray) -> np.ndarray:
    """Partial derivatives of the crude energy at every vertex, boundary included."""
    e = graph.edges
    flux = model.edge_derivative(edge_differences(graph, u))
    n = graph.n_vertices
    return np.bincount(e[:, 0], weights=flux, minlength=n) - np.bincount(e[:, 1], weights=flux, minlength=n)


def hessian_weights(model: ApModel, d: np.ndarray, rel_floor: float = 1e-3) -> np.ndarray:
    """
    Edge weights of the crude-energy Hessian, p(p-1)(d^2 + delta^2)^{(p-2)/2}.

    delta is rel_floor * max|d|, which keeps the weights finite for p < 2 and
    positive for p > 2.
    """
    p = model.p
    if p == 2.0:
        return np.full(d.shape, 2.0)
    scale = float(np.max(np.abs(d))) if d.size else 0.0
    if scale == 0.0:
        return np.full(d.shape, p * (p - 1.0))
    delta = rel_floor * scale
    return p * (p - 1.0) * (d * d + delta * delta) ** ((p - 2.0) / 2.0)


def weighted_laplacian(edges: np.ndarray, weights: np.ndarray, n: int) -> sparse.csr_matrix:
    """sum_e w_e (1_i - 1_j)(1_i - 1_j)^T as an n x n CSR matrix."""
    i, j = edges[:, 0], edges[:, 1]
    rows = np.concatenate([i, j, i, j])
    cols = np.concatenate([i, j, j, i])
    data = np.concatenate([weights, weights, -weights, -weights])
    return sparse.coo_matrix((data, (rows, cols)), shape=(n, n)).tocsr()


def restrict(matrix: sparse.spmatrix, ids: np.ndarray) -> sparse.csc_matrix:
    return matrix.tocsr()[ids][:, ids].tocsc()


class EnergyContext(BaseModel):
    """
    A graph, a cell model and the renormalizing factor r_p.

    Build with EnergyContext.create, which estimates r_p when it is not given.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    graph: GasketGraph
    model: ApModel
    r_p: float = Field(..., gt=0.0, lt=1.0)
    scale: float = Field(..., gt=0.0)

    @model_validator(mode="after")
    def _scale_matches(self) -> "EnergyContext":
        expected = self.r_p ** (-self.graph.level)
        if self.scale != expected:
            raise ValueError(f"scale {self.scale} differs from r_p^-m = {expected}")
        return self

    @classmethod
    def create(cls, graph: GasketGraph, model: ApModel, r_p: Optional[float] = None) -> "EnergyContext":
        if r_p is None:
            from nehari.energy.harmonic import default_rp

            r_p = default_rp(model.p)
        return cls(graph=graph, model=model, r_p=r_p, scale=r_p ** (-graph.level))

    @property
    def p(self) -> float:
        return self.model.p

    @cached_property
    def p2_factor(self):
        """LU factor of the interior p = 2 energy matrix scale * L."""
        ones = np.ones(self.graph.edges.shape[0])
        lap = weighted_laplacian(self.graph.edges, ones, self.graph.n_vertices)
        return splu(restrict(lap, self.graph.interior_ids) * self.scale)


def crude_energy(ctx: EnergyContext, u: np.ndarray) -> float:
    u = ctx.graph.check_field(u)
    return crude_energy_of(ctx.graph, ctx.model, u)


def renormalized_energy(ctx: EnergyContext, u: np.ndarray) -> float:
    return ctx.scale * crude_energy(ctx, u)


def energy_norm(ctx: EnergyContext, u: np.ndarray) -> float:
    """||u||_{E_p} = calE_p(u)^{1/p}."""
    return renormalized_energy(ctx, u) ** (1.0 / ctx.p)


def energy_gradient(ctx: EnergyContext, u: np.ndarray) -> np.ndarray:
    """Gradient of the renormalized energy; boundary entries are left in place."""
    u = ctx.graph.check_field(u)
    return ctx.scale * crude_gradient_of(ctx.graph, ctx.model, u)


def pair_norm(ctx: EnergyContext, u: np.ndarray, v: np.ndarray) -> float:
    """(calE_p(u) + calE_p(v))^{1/p}."""
    return (renormalized_energy(ctx, u) + renormalized_energy(ctx, v)) ** (1.0 / ctx.p)


class EnergyMetric:
    """
    Interior Hessian of (1/p) calE_p used as a Sobolev preconditioner.

    For p = 2 the matrix is constant and factorized once per context; for
    other exponents it is rebuilt from the current field.
    """

    def __init__(self, ctx: EnergyContext):
        self.ctx = ctx

    def matrix(self, u: np.ndarray) -> sparse.csc_matrix:
        g = self.ctx.graph
        w = hessian_weights(self.ctx.model, edge_differences(g, u))
        lap = weighted_laplacian(g.edges, w, g.n_vertices)
        return restrict(lap, g.interior_ids) * (self.ctx.scale / self.ctx.p)

    def solve(self, u: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        """Apply the inverse metric to a full-length vector; boundary entries come back 0."""
        g = self.ctx.graph
        out = np.zeros(g.n_vertices)
        if self.ctx.p == 2.0:
            out[g.interior_ids] = self.ctx.p2_factor.solve(rhs[g.interior_ids])
        else:
            out[g.interior_ids] = spsolve(self.matrix(u), rhs[g.interior_ids])
        return out
