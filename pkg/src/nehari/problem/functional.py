# src/nehari/problem/functional.py
"""
The coupled concave-convex problem and its Euler functional

    I(u, v) = (1/p) ||(u, v)||^p
              - (1/q) (lambda int a|u|^q + gamma int b|v|^q)
              - (1/(alpha+beta)) int h |u|^alpha |v|^beta

with integrals realized by the vertex quadrature of the level-m graph.
"""

import logging
from functools import cached_property
from typing import List, Optional, Tuple, TYPE_CHECKING

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from nehari.core.errors import LevelMismatchError
from nehari.energy.forms import EnergyContext, energy_gradient, renormalized_energy
from nehari.geometry.gasket import GasketGraph, cached_gasket
from nehari.problem.fields import VertexField

if TYPE_CHECKING:
    from nehari.problem.fibering import Constants

logger = logging.getLogger(__name__)


def integrate(g: GasketGraph, f: np.ndarray) -> float:
    """Quadrature of f against the normalized measure."""
    f = g.check_field(f, "integrand")
    return float(f @ g.vertex_weight)


def l1_norm(g: GasketGraph, f: np.ndarray) -> float:
    return integrate(g, np.abs(f))


def signed_power(t: np.ndarray, e: float) -> np.ndarray:
    """sign(t)|t|^e with value 0 at t = 0, for any real e."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    nz = t != 0.0
    out[nz] = np.sign(t[nz]) * np.abs(t[nz]) ** e
    return out


def _abs_power(t: np.ndarray, e: float) -> np.ndarray:
    """|t|^e with value 0 at t = 0 (e > 0 assumed by callers)."""
    return np.abs(t) ** e


class ProblemSpec(BaseModel):
    """
    Exponents, strengths and coefficient fields of the coupled system.

    H1 and H3 are not enforced here; check_hypotheses reports them and the
    solver refuses to run when they fail.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True, populate_by_name=True)

    p: float = Field(..., gt=1.0)
    q: float = Field(..., gt=0.0)
    alpha: float = Field(..., gt=0.0)
    beta: float = Field(..., gt=0.0)
    lam: float = Field(0.0, alias="lambda")
    gamma: float = 0.0
    a: np.ndarray
    b: np.ndarray
    h: np.ndarray
    level: int = Field(..., ge=0)

    @field_validator("a", "b", "h", mode="before")
    @classmethod
    def _as_array(cls, value):
        if isinstance(value, VertexField):
            value = value.values
        arr = np.array(value, dtype=float)
        arr.flags.writeable = False
        return arr

    @model_validator(mode="after")
    def _fields_on_level(self) -> "ProblemSpec":
        n = 3 * (3 ** self.level + 1) // 2
        for name in ("a", "b", "h"):
            arr = getattr(self, name)
            if arr.ndim != 1 or arr.size != n:
                raise LevelMismatchError(n, int(arr.size), f"coefficient {name}")
        return self

    @property
    def ab(self) -> float:
        return self.alpha + self.beta

    @property
    def graph(self) -> GasketGraph:
        return cached_gasket(self.level)

    @cached_property
    def a_l1(self) -> float:
        return l1_norm(self.graph, self.a)

    @cached_property
    def b_l1(self) -> float:
        return l1_norm(self.graph, self.b)

    @cached_property
    def h_l1(self) -> float:
        return l1_norm(self.graph, self.h)

    def strength(self, signed: bool = False) -> float:
        """|lambda| ||a||_1 + |gamma| ||b||_1, or the form without absolute values."""
        if signed:
            return self.lam * self.a_l1 + self.gamma * self.b_l1
        return abs(self.lam) * self.a_l1 + abs(self.gamma) * self.b_l1

    def with_strengths(self, lam: float, gamma: float) -> "ProblemSpec":
        return self.model_copy(update={"lam": lam, "gamma": gamma})


def _check_pair(spec: ProblemSpec, u: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    g = spec.graph
    return g.check_field(u, "u"), g.check_field(v, "v")


def _check_context(spec: ProblemSpec, ctx: EnergyContext) -> None:
    if ctx.graph.level != spec.level:
        raise LevelMismatchError(spec.graph.n_vertices, ctx.graph.n_vertices, "energy context")
    if ctx.p != spec.p:
        raise ValueError(f"energy context has p={ctx.p}, problem has p={spec.p}")


def term_concave(spec: ProblemSpec, u: np.ndarray, v: np.ndarray) -> float:
    """X = lambda int a|u|^q + gamma int b|v|^q."""
    u, v = _check_pair(spec, u, v)
    w = spec.graph.vertex_weight
    return float(spec.lam * (spec.a * _abs_power(u, spec.q)) @ w
                 + spec.gamma * (spec.b * _abs_power(v, spec.q)) @ w)


def term_coupling(spec: ProblemSpec, u: np.ndarray, v: np.ndarray) -> float:
    """H = int h |u|^alpha |v|^beta."""
    u, v = _check_pair(spec, u, v)
    w = spec.graph.vertex_weight
    return float((spec.h * _abs_power(u, spec.alpha) * _abs_power(v, spec.beta)) @ w)


def pair_energy(ctx: EnergyContext, u: np.ndarray, v: np.ndarray) -> float:
    """||(u, v)||^p = calE_p(u) + calE_p(v)."""
    return renormalized_energy(ctx, u) + renormalized_energy(ctx, v)


def euler_functional(spec: ProblemSpec, ctx: EnergyContext, u: np.ndarray, v: np.ndarray) -> float:
    _check_context(spec, ctx)
    norm_p = pair_energy(ctx, u, v)
    return (
        norm_p / spec.p
        - term_concave(spec, u, v) / spec.q
        - term_coupling(spec, u, v) / spec.ab
    )


def euler_gradient(
    spec: ProblemSpec, ctx: EnergyContext, u: np.ndarray, v: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Partial derivatives of I at every vertex, zeroed on the boundary.

    dI/du(x) = (1/p) dcalE(u)/du(x)
               - lambda a(x) |u|^{q-2}u(x) w(x)
               - (alpha/(alpha+beta)) h(x) |u|^{alpha-2}u(x) |v(x)|^beta w(x)
    and symmetrically in v.
    """
    _check_context(spec, ctx)
    u, v = _check_pair(spec, u, v)
    w = spec.graph.vertex_weight
    du = (
        energy_gradient(ctx, u) / spec.p
        - spec.lam * spec.a * signed_power(u, spec.q - 1.0) * w
        - (spec.alpha / spec.ab) * spec.h * signed_power(u, spec.alpha - 1.0) * _abs_power(v, spec.beta) * w
    )
    dv = (
        energy_gradient(ctx, v) / spec.p
        - spec.gamma * spec.b * signed_power(v, spec.q - 1.0) * w
        - (spec.beta / spec.ab) * spec.h * _abs_power(u, spec.alpha) * signed_power(v, spec.beta - 1.0) * w
    )
    mask = spec.graph.interior_mask
    return du * mask, dv * mask


class HypothesisItem(BaseModel):
    """One checked hypothesis; passed is None when it could not be evaluated."""
    name: str
    passed: Optional[bool]
    value: Optional[float] = None
    threshold: Optional[float] = None
    detail: str = ""


class HypothesisReport(BaseModel):
    items: List[HypothesisItem] = Field(default_factory=list)

    def item(self, name: str) -> HypothesisItem:
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)

    @property
    def failed(self) -> List[str]:
        return [it.name for it in self.items if it.passed is False]

    @property
    def ok(self) -> bool:
        """True when no evaluated item failed."""
        return not self.failed


def check_hypotheses(spec: ProblemSpec, constants: Optional["Constants"] = None) -> HypothesisReport:
    """
    Report H1 (exponent ordering), H3 (coefficient signs and support) and,
    when constants are given, H2 in its absolute-value form (the one used for
    gating) and in the signed form.
    """
    report = HypothesisReport()
    h1 = 1.0 < spec.q < spec.p < spec.ab
    report.items.append(HypothesisItem(
        name="H1",
        passed=h1,
        detail=f"1 < q={spec.q:g} < p={spec.p:g} < alpha+beta={spec.ab:g}",
    ))

    problems = []
    for name in ("a", "b", "h"):
        arr = getattr(spec, name)
        if np.any(arr < 0.0):
            problems.append(f"{name} has negative values")
        if not np.any(arr != 0.0):
            problems.append(f"{name} vanishes identically")
    if spec.h_l1 <= 0.0:
        problems.append("||h||_1 > 0 fails")
    report.items.append(HypothesisItem(
        name="H3",
        passed=not problems,
        value=spec.h_l1,
        detail="; ".join(problems) or "a, b, h >= 0, none identically zero",
    ))

    if constants is None:
        for name in ("H2", "H2_signed"):
            report.items.append(HypothesisItem(name=name, passed=None, detail="constants not computed"))
    else:
        s_abs, s_signed = spec.strength(), spec.strength(signed=True)
        report.items.append(HypothesisItem(
            name="H2",
            passed=s_abs < constants.kappa0,
            value=s_abs,
            threshold=constants.kappa0,
            detail="|lambda| ||a||_1 + |gamma| ||b||_1 < kappa_0",
        ))
        report.items.append(HypothesisItem(
            name="H2_signed",
            passed=s_signed < constants.kappa0,
            value=s_signed,
            threshold=constants.kappa0,
            detail="lambda ||a||_1 + gamma ||b||_1 < kappa_0",
        ))
    if report.failed:
        logger.info("hypotheses failed: %s", ", ".join(report.failed))
    return report
