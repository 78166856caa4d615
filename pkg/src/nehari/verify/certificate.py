# src/nehari/verify/certificate.py
"""
Certificate for a two-branch run.

A certificate is a flat list of named checks, each carrying the measured
value, the threshold it was compared with and the pass flag, plus echoes of
the problem, the constants and the resolved run configuration. Nothing in it
depends on the clock, so identical inputs give identical JSON.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, Field

from nehari.core.errors import OffManifoldError
from nehari.energy.forms import EnergyContext
from nehari.problem.fibering import (
    Constants,
    ManifoldClass,
    MANIFOLD_TOL,
    classify,
    compute_constants,
)
from nehari.problem.functional import (
    ProblemSpec,
    check_hypotheses,
    euler_functional,
    euler_gradient,
    pair_energy,
    term_concave,
    term_coupling,
)
from nehari.solver.descent import Solution
from nehari.solver.projection import Branch
from nehari.verify.sampling import (
    SamplingConfig,
    embedding_sampling,
    holder_sampling,
    nehari_sampling,
    perturbation_check,
)

logger = logging.getLogger(__name__)

# Strict inequalities must hold by at least this much.
MARGIN = 1e-10
IDENTITY_RTOL = 1e-8
EMBEDDING_RTOL = 1e-8


def pair_residual(spec: ProblemSpec, ctx: EnergyContext, u: np.ndarray, v: np.ndarray) -> float:
    """Interior sup-norm of the weak-form defect against the coordinate basis."""
    gu, gv = euler_gradient(spec, ctx, u, v)
    ids = spec.graph.interior_ids
    if ids.size == 0:
        return 0.0
    return float(max(np.max(np.abs(gu[ids])), np.max(np.abs(gv[ids]))))


def weak_residual(spec: ProblemSpec, ctx: EnergyContext, solution: Solution) -> float:
    return pair_residual(spec, ctx, solution.u, solution.v)


def nehari_margins(
    spec: ProblemSpec,
    ctx: EnergyContext,
    u: np.ndarray,
    v: np.ndarray,
    tol: float = MANIFOLD_TOL,
) -> Tuple[float, float]:
    """
    (X - (ab-p)/(ab-q) N, H - (p-q)/(ab-q) N) for an on-manifold pair.

    The first is positive on M_plus, the second on M_minus, and both vanish
    on M_zero.

    Raises:
        OffManifoldError: the pair is not on the Nehari set within tol
    """
    cls = classify(spec, ctx, u, v, tol)
    if cls is ManifoldClass.OFF_MANIFOLD:
        raise OffManifoldError("margins are only defined on the Nehari set")
    p, q, ab = spec.p, spec.q, spec.ab
    norm_p = pair_energy(ctx, u, v)
    return (
        term_concave(spec, u, v) - (ab - p) / (ab - q) * norm_p,
        term_coupling(spec, u, v) - (p - q) / (ab - q) * norm_p,
    )


class CertificateItem(BaseModel):
    name: str
    value: Optional[float] = None
    threshold: Optional[float] = None
    passed: bool
    gating: bool = Field(True, description="False for items recorded for information only")
    detail: str = ""


class Certificate(BaseModel):
    problem: Dict[str, Any]
    constants: Constants
    items: List[CertificateItem] = Field(default_factory=list)
    config: Optional[Dict[str, Any]] = None

    @property
    def passed(self) -> bool:
        return all(it.passed for it in self.items if it.gating)

    @property
    def failed(self) -> List[str]:
        return [it.name for it in self.items if it.gating and not it.passed]

    def item(self, name: str) -> CertificateItem:
        for it in self.items:
            if it.name == name:
                return it
        raise KeyError(name)

    def add(self, name: str, passed: bool, value: Optional[float] = None,
            threshold: Optional[float] = None, detail: str = "", gating: bool = True) -> None:
        self.items.append(CertificateItem(
            name=name,
            value=_finite_or_none(value),
            threshold=_finite_or_none(threshold),
            passed=bool(passed),
            gating=gating,
            detail=detail,
        ))

    def to_json(self) -> str:
        data = self.model_dump(mode="json")
        data["passed"] = self.passed
        data["failed"] = self.failed
        return json.dumps(data, indent=2, sort_keys=True)

    def export_to_json(self, filepath: Union[str, Path]) -> None:
        Path(filepath).write_text(self.to_json() + "\n")


def _finite_or_none(x: Optional[float]) -> Optional[float]:
    if x is None:
        return None
    x = float(x)
    return x if np.isfinite(x) else None


def problem_echo(spec: ProblemSpec) -> Dict[str, Any]:
    return {
        "p": spec.p,
        "q": spec.q,
        "alpha": spec.alpha,
        "beta": spec.beta,
        "lambda": spec.lam,
        "gamma": spec.gamma,
        "level": spec.level,
        "a_l1": spec.a_l1,
        "b_l1": spec.b_l1,
        "h_l1": spec.h_l1,
    }


def _branch_items(cert: Certificate, spec: ProblemSpec, ctx: EnergyContext, sol: Solution,
                  constants: Constants, grad_tol: float) -> None:
    prefix = sol.branch.value
    p, q, ab = spec.p, spec.q, spec.ab
    u, v = sol.u, sol.v
    norm_p = pair_energy(ctx, u, v)
    X, H = term_concave(spec, u, v), term_coupling(spec, u, v)
    value = euler_functional(spec, ctx, u, v)

    phi1 = norm_p - X - H
    cert.add(f"{prefix}.on_manifold", abs(phi1) <= MANIFOLD_TOL * norm_p, abs(phi1), MANIFOLD_TOL * norm_p,
             "|Phi'(1)| <= tol * ||(u,v)||^p")
    cls = classify(spec, ctx, u, v)
    expected = ManifoldClass.M_PLUS if sol.branch is Branch.PLUS else ManifoldClass.M_MINUS
    cert.add(f"{prefix}.branch_sign", cls is expected, detail=f"classified {cls.value}, expected {expected.value}")

    residual = pair_residual(spec, ctx, u, v)
    cert.add(f"{prefix}.weak_residual", residual <= grad_tol, residual, grad_tol,
             "interior sup-norm of the Euler gradient")

    via_x = (1 / p - 1 / ab) * norm_p - (1 / q - 1 / ab) * X
    via_h = (1 / p - 1 / q) * norm_p + (1 / q - 1 / ab) * H
    defect = max(abs(value - via_x), abs(value - via_h)) / max(abs(value), 1e-300)
    cert.add(f"{prefix}.energy_identities", defect <= IDENTITY_RTOL, defect, IDENTITY_RTOL,
             "I against its Nehari forms through X and through H")

    if cls is ManifoldClass.OFF_MANIFOLD:
        cert.add(f"{prefix}.nehari_margin", False, detail="pair is off the Nehari set")
    else:
        m_plus, m_minus = nehari_margins(spec, ctx, u, v)
        margin = m_plus if sol.branch is Branch.PLUS else m_minus
        detail = ("X - (ab-p)/(ab-q) ||(u,v)||^p" if sol.branch is Branch.PLUS
                  else "H - (p-q)/(ab-q) ||(u,v)||^p")
        cert.add(f"{prefix}.nehari_margin", margin > MARGIN, margin, MARGIN, detail)

    if sol.branch is Branch.PLUS:
        cert.add("plus.I_negative", -value > MARGIN, value, 0.0, "I on the plus branch is negative")
    else:
        cert.add("minus.I_above_d0", value - constants.d0 > MARGIN, value, constants.d0, "I on the minus branch exceeds d0")
        norm = norm_p ** (1.0 / p)
        bound = constants.minus_norm_lower_bound
        cert.add("minus.norm_lower_bound", norm - bound > MARGIN, norm, bound,
                 "||(u,v)|| on the minus branch is bounded below")
        h_bound = q * ab / (ab - q) * constants.d0
        cert.add("minus.coupling_lower_bound", H - h_bound > MARGIN, H, h_bound,
                 "int h|u|^alpha|v|^beta >= q ab / (ab - q) d0")
    positive = min(sol.u_positive_fraction, sol.v_positive_fraction)
    cert.add(f"{prefix}.sign_pattern", True, positive, gating=False,
             detail=f"positive interior share u={sol.u_positive_fraction:.3f} v={sol.v_positive_fraction:.3f}")


def certify(
    spec: ProblemSpec,
    ctx: EnergyContext,
    plus: Solution,
    minus: Solution,
    constants: Optional[Constants] = None,
    sampling: Optional[SamplingConfig] = None,
    grad_tol: float = 1e-6,
    config_echo: Optional[Dict[str, Any]] = None,
) -> Certificate:
    """Evaluate every check; never raises for a failed item."""
    constants = constants or compute_constants(spec, ctx)
    sampling = sampling or SamplingConfig()
    cert = Certificate(problem=problem_echo(spec), constants=constants, config=config_echo)

    for it in check_hypotheses(spec, constants).items:
        cert.add(
            f"hypothesis.{it.name}",
            it.passed is True,
            it.value,
            it.threshold,
            it.detail,
            gating=it.name != "H2_signed",
        )
    cert.add("d0_positive", constants.d0 > MARGIN, constants.d0, 0.0, "d0 > 0")

    _branch_items(cert, spec, ctx, plus, constants, grad_tol)
    _branch_items(cert, spec, ctx, minus, constants, grad_tol)

    i_plus = euler_functional(spec, ctx, plus.u, plus.v)
    i_minus = euler_functional(spec, ctx, minus.u, minus.v)
    cert.add(
        "separation",
        i_plus < 0.0 < constants.d0 < i_minus,
        i_minus - i_plus,
        detail=f"I+ = {i_plus:.10g} < 0 < d0 = {constants.d0:.10g} < I- = {i_minus:.10g}",
    )

    nehari = nehari_sampling(spec, ctx, constants, sampling)
    cert.add(
        "sampling.nehari_zero_empty",
        nehari.zero_count == 0 and nehari.min_abs_phi2_ratio > 0.0,
        nehari.min_abs_phi2_ratio,
        0.0,
        f"min |Phi''(1)|/||(u,v)||^p over {nehari.projected} projections; classes {nehari.counts}",
    )
    cert.add(
        "sampling.coercivity",
        nehari.coercivity_min_slack >= -MARGIN,
        nehari.coercivity_min_slack,
        0.0,
        "I above its coercivity lower bound at sampled Nehari points",
    )

    embedding = embedding_sampling(ctx, constants.K, sampling)
    cert.add(
        "sampling.embedding",
        embedding.max_ratio <= 1.0 + EMBEDDING_RTOL,
        embedding.max_ratio,
        1.0 + EMBEDDING_RTOL,
        f"max ||u||_inf / (K ||u||) over {embedding.fields} fields",
    )

    holder = holder_sampling(ctx, sampling)
    cert.add(
        "sampling.holder",
        bool(np.isfinite(holder.constant)),
        holder.constant,
        gating=False,
        detail="per-order maxima " + ", ".join(f"{m}: {r:.4g}" for m, r in sorted(holder.per_order.items())),
    )

    for sol in (plus, minus):
        report = perturbation_check(spec, ctx, sol, sampling)
        last = max((row[-1] for row in report.deviations), default=0.0)
        cert.add(
            f"{sol.branch.value}.perturbation",
            report.all_exist and report.monotone,
            last,
            detail=f"|t_eps - 1| over {len(report.deviations)} directions, eps {report.epsilons[0]:g} to {report.epsilons[-1]:g}",
        )

    if not cert.passed:
        logger.info("certificate failed: %s", ", ".join(cert.failed))
    return cert
