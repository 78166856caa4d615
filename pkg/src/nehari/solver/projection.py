# src/nehari/solver/projection.py
"""
Root maps onto the two Nehari branches.

A pair is moved along its ray to the plus root t_0 (local minimum of Phi)
or the minus root t_1 (local maximum of Phi). Scaling by t maps the cached
scalars as N -> t^p N, X -> t^q X, H -> t^{ab} H, so the projected pair's
diagnostics never need re-integration.
"""

import logging
from enum import Enum
from typing import Optional

import numpy as np
from pydantic import BaseModel, ConfigDict

from nehari.core.errors import BracketError
from nehari.energy.forms import EnergyContext
from nehari.problem.fibering import (
    FiberingDiagnostics,
    RootBranch,
    diagnose,
)
from nehari.problem.functional import ProblemSpec

logger = logging.getLogger(__name__)

# Pairs below this norm count as trivial.
NONTRIVIAL_NORM = 1e-10


class Branch(str, Enum):
    PLUS = "plus"
    MINUS = "minus"

    @property
    def root_branch(self) -> RootBranch:
        return RootBranch.PLUS if self is Branch.PLUS else RootBranch.MINUS


class Projection(BaseModel):
    """A pair scaled onto one branch, with the diagnostics of the original pair."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    branch: Branch
    t: float
    u: np.ndarray
    v: np.ndarray
    diag: FiberingDiagnostics

    @property
    def norm_p(self) -> float:
        return self.t ** self.diag.p * self.diag.norm_p

    @property
    def X(self) -> float:
        return self.t ** self.diag.q * self.diag.X

    @property
    def H(self) -> float:
        return self.t ** self.diag.ab * self.diag.H

    @property
    def I_value(self) -> float:
        d = self.diag
        return self.norm_p / d.p - self.X / d.q - self.H / d.ab


def project(
    spec: ProblemSpec,
    ctx: EnergyContext,
    u: np.ndarray,
    v: np.ndarray,
    branch: Branch,
) -> Optional[Projection]:
    """
    Scale (u, v) onto the requested branch, or None when the fibering map
    has no root of that kind (or the pair is trivial).
    """
    u = spec.graph.check_field(u, "u")
    v = spec.graph.check_field(v, "v")
    if not (np.any(u) or np.any(v)):
        return None
    try:
        diag = diagnose(spec, ctx, u, v)
    except ValueError:
        return None
    except BracketError as e:
        logger.debug("projection rejected: %s", e)
        return None
    root = diag.root(branch.root_branch)
    if root is None:
        return None
    proj = Projection(branch=branch, t=root.t, u=root.t * u, v=root.t * v, diag=diag)
    if proj.norm_p ** (1.0 / diag.p) < NONTRIVIAL_NORM:
        return None
    return proj


def project_plus(spec: ProblemSpec, ctx: EnergyContext, u: np.ndarray, v: np.ndarray) -> Optional[Projection]:
    """(t_2 u, t_2 v) on the plus branch; None when X(u, v) <= 0."""
    return project(spec, ctx, u, v, Branch.PLUS)


def project_minus(spec: ProblemSpec, ctx: EnergyContext, u: np.ndarray, v: np.ndarray) -> Optional[Projection]:
    """(t_3 u, t_3 v) on the minus branch; None when H(u, v) <= 0."""
    return project(spec, ctx, u, v, Branch.MINUS)
