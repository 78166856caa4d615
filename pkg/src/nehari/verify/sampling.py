# src/nehari/verify/sampling.py
"""
Sampled checks of the inequality suite.

Every routine takes its own seeded generator so a certificate built from the
same inputs is bit-identical.
"""

import logging
from typing import Dict, List, Optional

import numpy as np
from pydantic import BaseModel, Field

from nehari.core.settings import get_settings
from nehari.energy.embedding import holder_constant_check
from nehari.energy.forms import EnergyContext, energy_norm, renormalized_energy
from nehari.problem.fibering import (
    Constants,
    ManifoldClass,
    classify_scalars,
    fibering_from_scalars,
)
from nehari.problem.functional import ProblemSpec, term_concave, term_coupling
from nehari.solver.descent import Solution
from nehari.solver.projection import Branch, project

logger = logging.getLogger(__name__)


class SamplingConfig(BaseModel):
    nehari_samples: int = Field(2000, ge=0)
    holder_fields: int = Field(100, ge=0)
    embedding_fields: int = Field(1000, ge=0)
    perturbation_directions: int = Field(10, ge=0)
    eps_start: float = Field(1e-2, gt=0.0)
    eps_stop: float = Field(1e-5, gt=0.0)
    seed: int = Field(default_factory=lambda: get_settings().seed)

    def rng(self, stream: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])

    @property
    def epsilons(self) -> List[float]:
        """eps_start halved until it is at most eps_stop."""
        eps = [self.eps_start]
        while eps[-1] > self.eps_stop:
            eps.append(eps[-1] / 2.0)
        return eps


def random_zero_trace(n: int, rng: np.random.Generator) -> np.ndarray:
    u = rng.uniform(-1.0, 1.0, n)
    u[:3] = 0.0
    return u


class NehariSampleReport(BaseModel):
    """Classification and coercivity over ray-projected random pairs."""
    pairs: int = 0
    projected: int = 0
    counts: Dict[str, int] = Field(default_factory=dict)
    min_abs_phi2_ratio: float = float("inf")
    coercivity_min_slack: float = float("inf")

    @property
    def zero_count(self) -> int:
        return self.counts.get(ManifoldClass.M_ZERO.value, 0)


def nehari_sampling(
    spec: ProblemSpec,
    ctx: EnergyContext,
    constants: Constants,
    config: SamplingConfig,
    tol: float = 1e-8,
) -> NehariSampleReport:
    """
    Project random pairs to every Nehari root of their fiber and record
    min |Phi''(1)| / ||(u,v)||^p, the class counts, and the smallest slack in

        I >= (1/p - 1/ab) ||(u,v)||^p - (1/q - 1/ab) K^q S (||u|| + ||v||)^q.

    Every other pair is made nonnegative so both branches are exercised.
    """
    rng = config.rng(1)
    p, q, ab = spec.p, spec.q, spec.ab
    n = ctx.graph.n_vertices
    report = NehariSampleReport()
    counts: Dict[str, int] = {}
    for k in range(config.nehari_samples):
        u, v = random_zero_trace(n, rng), random_zero_trace(n, rng)
        if k % 2 == 0:
            u, v = np.abs(u), np.abs(v)
        eu, ev = renormalized_energy(ctx, u), renormalized_energy(ctx, v)
        X, H = term_concave(spec, u, v), term_coupling(spec, u, v)
        report.pairs += 1
        diag = fibering_from_scalars(eu + ev, X, H, p, q, ab)
        for root in diag.roots:
            t = root.t
            n_t, x_t, h_t = t ** p * (eu + ev), t ** q * X, t ** ab * H
            cls = classify_scalars(n_t, x_t, h_t, p, q, ab, tol)
            counts[cls.value] = counts.get(cls.value, 0) + 1
            report.projected += 1
            second = (p - 1) * n_t - (q - 1) * x_t - (ab - 1) * h_t
            report.min_abs_phi2_ratio = min(report.min_abs_phi2_ratio, abs(second) / n_t)

            value = n_t / p - x_t / q - h_t / ab
            norms = t * (eu ** (1.0 / p) + ev ** (1.0 / p))
            bound = (1.0 / p - 1.0 / ab) * n_t - (1.0 / q - 1.0 / ab) * constants.K ** q * constants.strength * norms ** q
            report.coercivity_min_slack = min(report.coercivity_min_slack, value - bound)
    report.counts = dict(sorted(counts.items()))
    logger.debug("nehari sampling: %s, min |phi''|/N = %.3e", report.counts, report.min_abs_phi2_ratio)
    return report


class EmbeddingSampleReport(BaseModel):
    fields: int = 0
    max_ratio: float = 0.0


def embedding_sampling(ctx: EnergyContext, K: float, config: SamplingConfig) -> EmbeddingSampleReport:
    """Largest ||u||_inf / (K ||u||_{E_p}) over random zero-boundary fields."""
    rng = config.rng(2)
    report = EmbeddingSampleReport()
    n = ctx.graph.n_vertices
    for _ in range(config.embedding_fields):
        u = random_zero_trace(n, rng)
        norm = energy_norm(ctx, u)
        if norm <= 0.0:
            continue
        report.fields += 1
        report.max_ratio = max(report.max_ratio, float(np.max(np.abs(u))) / (K * norm))
    return report


class HolderSampleReport(BaseModel):
    fields: int = 0
    per_order: Dict[int, float] = Field(default_factory=dict)
    constant: float = 0.0


def holder_sampling(ctx: EnergyContext, config: SamplingConfig,
                    orders: Optional[List[int]] = None) -> HolderSampleReport:
    """Per-order maxima of the Hoelder ratios over random zero-boundary fields."""
    rng = config.rng(3)
    orders = list(range(ctx.graph.level + 1)) if orders is None else orders
    report = HolderSampleReport(per_order={m: 0.0 for m in orders})
    n = ctx.graph.n_vertices
    for _ in range(config.holder_fields):
        u = random_zero_trace(n, rng)
        if renormalized_energy(ctx, u) <= 0.0:
            continue
        check = holder_constant_check(ctx, u, orders)
        report.fields += 1
        for m, ratio in check.per_order.items():
            report.per_order[m] = max(report.per_order[m], ratio)
    report.constant = max(report.per_order.values(), default=0.0)
    return report


class PerturbationReport(BaseModel):
    """|t_eps - 1| for each direction (rows) and eps (columns)."""
    epsilons: List[float]
    deviations: List[List[float]] = Field(default_factory=list)
    all_exist: bool = True
    monotone: bool = True


def perturbation_check(
    spec: ProblemSpec,
    ctx: EnergyContext,
    solution: Solution,
    config: SamplingConfig,
) -> PerturbationReport:
    """
    Project (u + eps w1, v + eps w2) back onto the solution's branch for
    random directions and check that |t_eps - 1| shrinks as eps halves.
    """
    stream = 4 if solution.branch is Branch.PLUS else 5
    rng = config.rng(stream)
    report = PerturbationReport(epsilons=config.epsilons)
    n = ctx.graph.n_vertices
    for _ in range(config.perturbation_directions):
        w1, w2 = random_zero_trace(n, rng), random_zero_trace(n, rng)
        row: List[float] = []
        for eps in report.epsilons:
            proj = project(spec, ctx, solution.u + eps * w1, solution.v + eps * w2, solution.branch)
            if proj is None:
                report.all_exist = False
                row.append(float("nan"))
                continue
            row.append(abs(proj.t - 1.0))
        if any(b > a for a, b in zip(row, row[1:])):
            report.monotone = False
        report.deviations.append(row)
    return report
