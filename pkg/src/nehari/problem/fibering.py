# src/nehari/problem/fibering.py
"""
Fibering maps and the Nehari manifold.

For a fixed pair (u, v) with N = ||(u, v)||^p, X the concave term and H the
coupling term,

    Phi(t) = I(tu, tv) = t^p N / p - t^q X / q - t^{ab} H / ab
    M(t)   = t^{p-q} N - t^{ab-q} H

and (tu, tv) lies on the Nehari set exactly when M(t) = X. Everything here
works on the three cached scalars; no field is touched per t.
"""

import logging
import math
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field
from scipy.optimize import bisect

from nehari.core.errors import BracketError, HypothesisError
from nehari.energy.embedding import estimate_embedding_K
from nehari.energy.forms import EnergyContext
from nehari.problem.functional import (
    ProblemSpec,
    _check_context,
    pair_energy,
    term_concave,
    term_coupling,
)

logger = logging.getLogger(__name__)

# Relative width of the tangency band X = M(t_max).
TANGENCY_RTOL = 1e-12
# Relative band for Phi'(1) and Phi''(1) in classify.
MANIFOLD_TOL = 1e-8
_MAX_BRACKET_STEPS = 200
_BISECT_RTOL = 1e-14


class FiberingCase(str, Enum):
    """Shape of Phi by the signs of X and H."""
    INCREASING = "increasing"          # X <= 0, H <= 0: no root
    MINUS_ONLY = "minus_only"          # X <= 0, H > 0: one root, M decreasing
    PLUS_ONLY = "plus_only"            # X > 0, H <= 0: one root, M increasing
    TWO_ROOTS = "two_roots"            # X > 0, H > 0, X < M(t_max)
    TANGENT = "tangent"                # X = M(t_max): degenerate root at t_max
    ABOVE_PEAK = "above_peak"          # X > M(t_max): no root


class RootBranch(str, Enum):
    PLUS = "plus"
    MINUS = "minus"
    ZERO = "zero"


class ManifoldClass(str, Enum):
    M_PLUS = "M_plus"
    M_ZERO = "M_zero"
    M_MINUS = "M_minus"
    OFF_MANIFOLD = "off_manifold"


class ParameterRegion(str, Enum):
    INSIDE_LAMBDA0 = "inside_Lambda0"
    INSIDE_LAMBDA_ONLY = "inside_Lambda_only"
    OUTSIDE = "outside"


class NehariRoot(BaseModel):
    t: float = Field(..., gt=0.0)
    branch: RootBranch
    m_prime: float


class FiberingDiagnostics(BaseModel):
    """Cached scalars of one pair and the resulting root structure."""
    norm_p: float = Field(..., gt=0.0)
    X: float
    H: float
    p: float
    q: float
    ab: float
    t_max: Optional[float] = None
    M_at_tmax: Optional[float] = None
    roots: List[NehariRoot] = Field(default_factory=list)
    case_tag: FiberingCase

    def root(self, branch: RootBranch) -> Optional[NehariRoot]:
        for r in self.roots:
            if r.branch == branch:
                return r
        return None


def _check_t(t: float) -> None:
    if not t > 0.0:
        raise ValueError(f"t must be positive, got {t}")


def phi(diag: FiberingDiagnostics, t: float) -> float:
    _check_t(t)
    return t ** diag.p * diag.norm_p / diag.p - t ** diag.q * diag.X / diag.q - t ** diag.ab * diag.H / diag.ab


def phi_prime(diag: FiberingDiagnostics, t: float) -> float:
    _check_t(t)
    return t ** (diag.p - 1) * diag.norm_p - t ** (diag.q - 1) * diag.X - t ** (diag.ab - 1) * diag.H


def phi_double_prime(diag: FiberingDiagnostics, t: float) -> float:
    _check_t(t)
    return (
        (diag.p - 1) * t ** (diag.p - 2) * diag.norm_p
        - (diag.q - 1) * t ** (diag.q - 2) * diag.X
        - (diag.ab - 1) * t ** (diag.ab - 2) * diag.H
    )


def _m(norm_p: float, H: float, p: float, q: float, ab: float, t: float) -> float:
    return t ** (p - q) * norm_p - t ** (ab - q) * H


def _m_prime(norm_p: float, H: float, p: float, q: float, ab: float, t: float) -> float:
    return (p - q) * t ** (p - q - 1) * norm_p - (ab - q) * t ** (ab - q - 1) * H


def m_function(diag: FiberingDiagnostics, t: float) -> float:
    """M(t) = t^{p-q} N - t^{ab-q} H."""
    _check_t(t)
    return _m(diag.norm_p, diag.H, diag.p, diag.q, diag.ab, t)


def m_prime(diag: FiberingDiagnostics, t: float) -> float:
    _check_t(t)
    return _m_prime(diag.norm_p, diag.H, diag.p, diag.q, diag.ab, t)


def t_max_value(norm_p: float, H: float, p: float, q: float, ab: float) -> Optional[float]:
    """Unique critical point of M, present only when H > 0."""
    if H <= 0.0:
        return None
    return ((p - q) * norm_p / ((ab - q) * H)) ** (1.0 / (ab - p))


def t_max(diag: FiberingDiagnostics) -> Optional[float]:
    return diag.t_max


def _bisect(f, lo: float, hi: float) -> float:
    """Root in [lo, hi] to relative accuracy, lo > 0."""
    return float(bisect(f, lo, hi, xtol=_BISECT_RTOL * lo, rtol=_BISECT_RTOL, maxiter=10_000))


def _lower_bracket(f, start: float) -> float:
    """Shrink start until f < 0 there."""
    t = start
    for _ in range(_MAX_BRACKET_STEPS):
        if f(t) < 0.0:
            return t
        t *= 0.5
    raise BracketError(f"no lower bracket found below t={start:g}")


def _upper_bracket(f, start: float, sign: float) -> float:
    """Grow start until sign * f > 0 there."""
    t = start
    for _ in range(_MAX_BRACKET_STEPS):
        value = f(t)
        if math.isfinite(value) and sign * value > 0.0:
            return t
        t *= 2.0
    raise BracketError(f"no upper bracket found above t={start:g}")


def fibering_from_scalars(norm_p: float, X: float, H: float, p: float, q: float, ab: float) -> FiberingDiagnostics:
    """
    Locate the Nehari roots of M(t) = X by bisection on the monotone pieces
    of M: (0, t_max] and [t_max, T) when H > 0, (0, T) otherwise.

    Raises:
        ValueError: norm_p <= 0 (zero pair)
        BracketError: a root that must exist could not be bracketed
    """
    if not norm_p > 0.0:
        raise ValueError("fibering needs a nonzero pair (norm_p > 0)")
    tm = t_max_value(norm_p, H, p, q, ab)

    def f(t: float) -> float:
        return _m(norm_p, H, p, q, ab, t) - X

    def labeled(t: float, branch: RootBranch) -> NehariRoot:
        return NehariRoot(t=t, branch=branch, m_prime=_m_prime(norm_p, H, p, q, ab, t))

    roots: List[NehariRoot] = []
    m_peak = None
    if tm is None:
        if X <= 0.0:
            case = FiberingCase.INCREASING
        else:
            hi = _upper_bracket(f, 1.0, +1.0)
            lo = _lower_bracket(f, min(1.0, hi))
            roots.append(labeled(_bisect(f, lo, hi), RootBranch.PLUS))
            case = FiberingCase.PLUS_ONLY
    else:
        m_peak = _m(norm_p, H, p, q, ab, tm)
        if X <= 0.0:
            hi = _upper_bracket(f, 2.0 * tm, -1.0)
            roots.append(labeled(_bisect(f, tm, hi), RootBranch.MINUS))
            case = FiberingCase.MINUS_ONLY
        elif abs(X - m_peak) <= TANGENCY_RTOL * abs(m_peak):
            roots.append(labeled(tm, RootBranch.ZERO))
            case = FiberingCase.TANGENT
        elif X > m_peak:
            case = FiberingCase.ABOVE_PEAK
        else:
            lo = _lower_bracket(f, tm)
            roots.append(labeled(_bisect(f, lo, tm), RootBranch.PLUS))
            hi = _upper_bracket(f, 2.0 * tm, -1.0)
            roots.append(labeled(_bisect(f, tm, hi), RootBranch.MINUS))
            case = FiberingCase.TWO_ROOTS

    return FiberingDiagnostics(
        norm_p=norm_p, X=X, H=H, p=p, q=q, ab=ab,
        t_max=tm, M_at_tmax=m_peak, roots=roots, case_tag=case,
    )


def diagnose(spec: ProblemSpec, ctx: EnergyContext, u: np.ndarray, v: np.ndarray) -> FiberingDiagnostics:
    """Compute (N, X, H) for the pair once and analyse its fibering map."""
    _check_context(spec, ctx)
    return fibering_from_scalars(
        pair_energy(ctx, u, v),
        term_concave(spec, u, v),
        term_coupling(spec, u, v),
        spec.p, spec.q, spec.ab,
    )


def nehari_roots(diag: FiberingDiagnostics) -> List[NehariRoot]:
    return list(diag.roots)


def classify_scalars(norm_p: float, X: float, H: float, p: float, q: float, ab: float,
                     tol: float = MANIFOLD_TOL) -> ManifoldClass:
    """Classify the pair itself (t = 1) from its cached scalars."""
    if not norm_p > 0.0:
        raise ValueError("cannot classify the zero pair")
    band = tol * norm_p
    if abs(norm_p - X - H) > band:
        return ManifoldClass.OFF_MANIFOLD
    second = (p - 1) * norm_p - (q - 1) * X - (ab - 1) * H
    if abs(second) <= band:
        return ManifoldClass.M_ZERO
    return ManifoldClass.M_PLUS if second > 0 else ManifoldClass.M_MINUS


def classify(spec: ProblemSpec, ctx: EnergyContext, u: np.ndarray, v: np.ndarray,
             tol: float = MANIFOLD_TOL) -> ManifoldClass:
    """
    off_manifold when |Phi'(1)| > tol * N, otherwise the sign of Phi''(1)
    with an M_zero band |Phi''(1)| <= tol * N.
    """
    _check_context(spec, ctx)
    return classify_scalars(
        pair_energy(ctx, u, v),
        term_concave(spec, u, v),
        term_coupling(spec, u, v),
        spec.p, spec.q, spec.ab, tol,
    )


class Constants(BaseModel):
    """Explicit constants at the working level, all from the level-m K."""
    K: float = Field(..., gt=0.0)
    kappa: float
    kappa0: float
    d0: float
    a_l1: float
    b_l1: float
    h_l1: float
    strength: float = Field(..., description="|lambda| ||a||_1 + |gamma| ||b||_1")
    signed_strength: float
    minus_norm_lower_bound: float = Field(..., description="every M_minus point has ||(u,v)|| at least this")
    zero_norm_upper_bound: float = Field(..., description="any M_zero point has ||(u,v)|| at most this")
    k_overridden: bool = False


def compute_constants(spec: ProblemSpec, ctx: EnergyContext, k_override: Optional[float] = None) -> Constants:
    """
    kappa   = ((ab-p)/(ab-q)) K^{-q} ((p-q)/((ab-q) K^{ab} ||h||_1))^{(p-q)/(ab-p)}
    kappa_0 = (q/p) kappa
    d_0     = R^q ((1/p - 1/ab) R^{p-q} - (1/q - 1/ab) K^q S)
    where R = ((p-q)/(ab-q) K^{-ab} / ||h||_1)^{1/(ab-p)} and S is the strength.

    Raises:
        HypothesisError: ||h||_1 = 0 or H1 fails
    """
    _check_context(spec, ctx)
    p, q, ab = spec.p, spec.q, spec.ab
    if not 1.0 < q < p < ab:
        raise HypothesisError(f"constants need 1 < q < p < alpha+beta, got q={q}, p={p}, ab={ab}", ["H1"])
    h_l1 = spec.h_l1
    if h_l1 <= 0.0:
        raise HypothesisError("constants need ||h||_1 > 0", ["H3"])
    if k_override is not None:
        if not k_override > 0.0:
            raise ValueError(f"K override must be positive, got {k_override}")
        K = float(k_override)
    else:
        K = estimate_embedding_K(ctx)

    radius = ((p - q) / (ab - q) * K ** (-ab) / h_l1) ** (1.0 / (ab - p))
    kappa = (ab - p) / (ab - q) * K ** (-q) * radius ** (p - q)
    kappa0 = q / p * kappa
    s = spec.strength()
    d0 = radius ** q * ((1.0 / p - 1.0 / ab) * radius ** (p - q) - (1.0 / q - 1.0 / ab) * K ** q * s)
    zero_bound = ((ab - q) / (ab - p) * s * K ** q) ** (1.0 / (p - q))
    logger.debug("constants: K=%.6g kappa=%.6g kappa0=%.6g d0=%.6g", K, kappa, kappa0, d0)
    return Constants(
        K=K,
        kappa=kappa,
        kappa0=kappa0,
        d0=d0,
        a_l1=spec.a_l1,
        b_l1=spec.b_l1,
        h_l1=h_l1,
        strength=s,
        signed_strength=spec.strength(signed=True),
        minus_norm_lower_bound=radius,
        zero_norm_upper_bound=zero_bound,
        k_overridden=k_override is not None,
    )


def tmax_value_lower_bound(diag: FiberingDiagnostics, constants: Constants) -> float:
    """
    Lower bound for M(t_max) in terms of the pair norm, K and ||h||_1:
    ||(u,v)||^q ((p-q)/(ab-q))^{e} ((ab-p)/(ab-q)) (1/(||h||_1 K^{ab}))^{e},
    e = (p-q)/(ab-p).
    """
    p, q, ab = diag.p, diag.q, diag.ab
    e = (p - q) / (ab - p)
    return (
        diag.norm_p ** (q / p)
        * ((p - q) / (ab - q)) ** e
        * (ab - p) / (ab - q)
        * (1.0 / (constants.h_l1 * constants.K ** ab)) ** e
    )


def lambda_region(spec: ProblemSpec, constants: Constants, signed: bool = False) -> ParameterRegion:
    """Membership of (lambda, gamma) in Lambda_0 and Lambda, by default in absolute-value form."""
    s = spec.lam * constants.a_l1 + spec.gamma * constants.b_l1 if signed else (
        abs(spec.lam) * constants.a_l1 + abs(spec.gamma) * constants.b_l1
    )
    if s < constants.kappa0:
        return ParameterRegion.INSIDE_LAMBDA0
    if s < constants.kappa:
        return ParameterRegion.INSIDE_LAMBDA_ONLY
    return ParameterRegion.OUTSIDE
