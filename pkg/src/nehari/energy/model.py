# src/nehari/energy/model.py
"""
The cell functional A_p.

The default model is A_p(a1, a2, a3) = sum_{i<j} |a_i - a_j|^p. It is
translation invariant, homogeneous of degree p, symmetric, Markov, and
vanishes exactly on constant triples; at p = 2 it is the classical Dirichlet
cell energy whose renormalizing factor is 3/5.
"""

from typing import Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

ArrayLike = Union[float, np.ndarray]

# Pairs (i, j) of cell corners carrying the edge terms.
CELL_EDGES = ((0, 1), (1, 2), (0, 2))


class ApModel(BaseModel):
    """Exponent p > 1 of the cell energy and the generating profile it uses."""
    model_config = ConfigDict(frozen=True)

    p: float = Field(..., gt=1.0, description="Energy exponent")
    g_model: Literal["edge_sum"] = Field(
        "edge_sum",
        description="Generating profile g(x) = A_p(-1, x, 1); only the edge-sum cell energy is implemented",
    )

    def edge_term(self, d: ArrayLike) -> ArrayLike:
        """|d|^p for an edge difference d."""
        return np.abs(d) ** self.p

    def edge_derivative(self, d: ArrayLike) -> ArrayLike:
        """d/dd |d|^p = p sign(d) |d|^{p-1}; continuous for p > 1."""
        return self.p * np.sign(d) * np.abs(d) ** (self.p - 1.0)

    def g(self, x: ArrayLike) -> ArrayLike:
        """The generating profile g(x) = A_p(-1, x, 1); even in x."""
        return ap_eval(self, -1.0, x, 1.0)


def ap_eval(model: ApModel, a1: ArrayLike, a2: ArrayLike, a3: ArrayLike) -> ArrayLike:
    """Evaluate A_p on one triple or elementwise on arrays of triples."""
    return (
        model.edge_term(np.subtract(a1, a2))
        + model.edge_term(np.subtract(a2, a3))
        + model.edge_term(np.subtract(a1, a3))
    )
