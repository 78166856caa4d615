# src/nehari/solver/descent.py
"""
Projected descent on the Nehari branches.

The reduced functional J(w) = I(t(w) w) has gradient grad I at points of the
branch, because Phi'(1) = 0 there. Each outer step preconditions grad I with
the energy metric, backtracks along the ray-projected path until Armijo
holds, and stops when the interior sup-norm of grad I drops below grad_tol.
Independent random starts run in a thread pool; the lowest I wins.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from tenacity import retry, retry_if_exception_type, stop_after_attempt

from nehari.core.errors import AdmissibleStartError, HypothesisError
from nehari.core.settings import get_settings
from nehari.energy.forms import EnergyContext, EnergyMetric
from nehari.energy.minimize import LineSearch, backtrack
from nehari.problem.fibering import (
    Constants,
    ParameterRegion,
    compute_constants,
    lambda_region,
    phi_double_prime,
    phi_prime,
)
from nehari.problem.functional import ProblemSpec, check_hypotheses, euler_gradient
from nehari.solver.projection import Branch, Projection, project

logger = logging.getLogger(__name__)

START_ATTEMPTS = 64


class SolverConfig(BaseModel):
    starts: int = Field(16, ge=1)
    max_outer_iters: int = Field(2000, ge=1)
    armijo: float = Field(1e-4, gt=0.0, lt=1.0)
    shrink: float = Field(0.5, gt=0.0, lt=1.0)
    initial_step: float = Field(1.0, gt=0.0)
    max_backtracks: int = Field(50, ge=1)
    grad_tol: float = Field(1e-6, gt=0.0)
    seed: int = Field(default_factory=lambda: get_settings().seed)
    workers: int = Field(default_factory=lambda: get_settings().workers, ge=1)

    @property
    def line_search(self) -> LineSearch:
        return LineSearch(
            armijo=self.armijo,
            shrink=self.shrink,
            initial_step=self.initial_step,
            max_backtracks=self.max_backtracks,
        )


class Solution(BaseModel):
    """Best point found on one branch."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    branch: Branch
    u: np.ndarray
    v: np.ndarray
    I_value: float
    phi1: float = Field(..., description="Phi'(1), the Nehari defect")
    phi2: float = Field(..., description="Phi''(1)")
    norm_p: float
    X: float
    H: float
    grad_dual_norm: float
    iterations: int
    start_index: int
    converged: bool
    u_positive_fraction: float = Field(..., description="share of interior vertices with u > 0")
    v_positive_fraction: float
    history: List[float] = Field(default_factory=list, description="I at the start and after each accepted step")


class _InadmissibleStart(Exception):
    def __init__(self, condition: str):
        super().__init__(condition)
        self.condition = condition


def _sign_condition(branch: Branch) -> str:
    return "X > 0" if branch is Branch.PLUS else "H > 0"


def _random_pair(spec: ProblemSpec, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray]:
    """Entries uniform in [-1, 1], boundary zeroed."""
    n = spec.graph.n_vertices
    u = rng.uniform(-1.0, 1.0, n)
    v = rng.uniform(-1.0, 1.0, n)
    u[:3] = 0.0
    v[:3] = 0.0
    return u, v


@retry(
    stop=stop_after_attempt(START_ATTEMPTS),
    retry=retry_if_exception_type(_InadmissibleStart),
    reraise=True,
)
def _admissible_start(
    spec: ProblemSpec, ctx: EnergyContext, branch: Branch, rng: np.random.Generator
) -> Projection:
    u, v = _random_pair(spec, rng)
    if branch is Branch.PLUS:
        if spec.lam > 0:
            u = np.abs(u)
        if spec.gamma > 0:
            v = np.abs(v)
    else:
        u, v = np.abs(u), np.abs(v)
    proj = project(spec, ctx, u, v, branch)
    if proj is None:
        raise _InadmissibleStart(_sign_condition(branch))
    return proj


def _interior_sup(spec: ProblemSpec, gu: np.ndarray, gv: np.ndarray) -> float:
    ids = spec.graph.interior_ids
    if ids.size == 0:
        return 0.0
    return float(max(np.max(np.abs(gu[ids])), np.max(np.abs(gv[ids]))))


def _to_solution(spec: ProblemSpec, point: Projection, residual: float,
                 iterations: int, start_index: int, converged: bool,
                 history: Optional[List[float]] = None) -> Solution:
    d = point.diag.model_copy(update={"norm_p": point.norm_p, "X": point.X, "H": point.H})
    ids = spec.graph.interior_ids
    return Solution(
        branch=point.branch,
        u=point.u,
        v=point.v,
        I_value=point.I_value,
        phi1=phi_prime(d, 1.0),
        phi2=phi_double_prime(d, 1.0),
        norm_p=point.norm_p,
        X=point.X,
        H=point.H,
        grad_dual_norm=residual,
        iterations=iterations,
        start_index=start_index,
        converged=converged,
        u_positive_fraction=float(np.mean(point.u[ids] > 0)) if ids.size else 0.0,
        v_positive_fraction=float(np.mean(point.v[ids] > 0)) if ids.size else 0.0,
        history=list(history or []),
    )


def descend_from(
    spec: ProblemSpec,
    ctx: EnergyContext,
    start: Projection,
    config: SolverConfig,
    start_index: int = 0,
) -> Solution:
    """Run the projected descent from one point already on its branch."""
    metric = EnergyMetric(ctx)
    search = config.line_search
    branch = start.branch
    point = start
    value = point.I_value
    history = [value]

    for it in range(config.max_outer_iters):
        gu, gv = euler_gradient(spec, ctx, point.u, point.v)
        residual = _interior_sup(spec, gu, gv)
        if residual < config.grad_tol:
            return _to_solution(spec, point, residual, it, start_index, True, history)

        du = metric.solve(point.u, gu)
        dv = metric.solve(point.v, gv)
        slope = float(gu @ du + gv @ dv)
        if not np.isfinite(slope) or slope <= 0.0:
            du, dv = gu, gv
            slope = float(gu @ gu + gv @ gv)

        trials = {}

        def trial_value(step: float) -> Optional[float]:
            trial = project(spec, ctx, point.u - step * du, point.v - step * dv, branch)
            if trial is None:
                return None
            trials[step] = trial
            return trial.I_value

        step, new_value = backtrack(trial_value, value, slope, search)
        if step is None:
            logger.debug("start %d: line search stalled at residual %.3e", start_index, residual)
            return _to_solution(spec, point, residual, it, start_index, False, history)
        point, value = trials[step], new_value
        history.append(value)
        if it % 100 == 0:
            logger.debug("start %d iter %d: I=%.12g residual=%.3e", start_index, it, value, residual)

    gu, gv = euler_gradient(spec, ctx, point.u, point.v)
    residual = _interior_sup(spec, gu, gv)
    return _to_solution(
        spec, point, residual, config.max_outer_iters, start_index, residual < config.grad_tol, history
    )


def _gate(spec: ProblemSpec, branch: Branch, constants: Constants) -> None:
    report = check_hypotheses(spec, constants)
    structural = [name for name in ("H1", "H3") if name in report.failed]
    if structural:
        raise HypothesisError(f"hypotheses failed: {', '.join(structural)}", structural)
    region = lambda_region(spec, constants)
    allowed = (
        {ParameterRegion.INSIDE_LAMBDA0}
        if branch is Branch.MINUS
        else {ParameterRegion.INSIDE_LAMBDA0, ParameterRegion.INSIDE_LAMBDA_ONLY}
    )
    if region not in allowed:
        raise HypothesisError(
            f"(lambda, gamma) is {region.value}; the {branch.value} branch needs "
            f"{'Lambda_0' if branch is Branch.MINUS else 'Lambda'} "
            f"(strength {spec.strength():.6g}, kappa0 {constants.kappa0:.6g}, kappa {constants.kappa:.6g})",
            ["H2"],
        )


def _run_start(spec: ProblemSpec, ctx: EnergyContext, branch: Branch, config: SolverConfig,
               start_index: int) -> Solution:
    rng = np.random.default_rng([config.seed, start_index])
    try:
        start = _admissible_start(spec, ctx, branch, rng)
    except _InadmissibleStart as e:
        raise AdmissibleStartError(
            f"no admissible start for the {branch.value} branch after {START_ATTEMPTS} draws: "
            f"{e.condition} never held",
            condition=e.condition,
        ) from e
    return descend_from(spec, ctx, start, config, start_index)


def minimize_branch(
    spec: ProblemSpec,
    ctx: EnergyContext,
    branch: Branch,
    config: Optional[SolverConfig] = None,
    constants: Optional[Constants] = None,
) -> Solution:
    """
    Minimize I over one Nehari branch from config.starts random starts.

    Raises:
        HypothesisError: H1/H3 fail, or (lambda, gamma) lies outside the
            region the branch needs (Lambda_0 for minus, Lambda for plus)
        AdmissibleStartError: no start met the branch's sign condition
    """
    config = config or SolverConfig()
    constants = constants or compute_constants(spec, ctx)
    _gate(spec, branch, constants)

    def run(index: int) -> Solution:
        return _run_start(spec, ctx, branch, config, index)

    indices = range(config.starts)
    if config.workers > 1 and config.starts > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results: List[Solution] = list(pool.map(run, indices))
    else:
        results = [run(i) for i in indices]

    best = min(results, key=lambda s: (s.I_value, s.start_index))
    logger.info(
        "%s branch: I=%.10g residual=%.3e after %d iterations (start %d of %d)",
        branch.value, best.I_value, best.grad_dual_norm, best.iterations, best.start_index, config.starts,
    )
    if not best.converged:
        logger.warning("%s branch did not reach grad_tol %.1e", branch.value, config.grad_tol)
    return best


def solve_system(
    spec: ProblemSpec,
    ctx: EnergyContext,
    config: Optional[SolverConfig] = None,
    constants: Optional[Constants] = None,
) -> Tuple[Solution, Solution]:
    """Both branch minimizers; (lambda, gamma) must lie in Lambda_0."""
    constants = constants or compute_constants(spec, ctx)
    report = check_hypotheses(spec, constants)
    if "H2" in report.failed:
        raise HypothesisError(
            f"|lambda| ||a||_1 + |gamma| ||b||_1 = {spec.strength():.6g} is not below kappa0 = {constants.kappa0:.6g}",
            report.failed,
        )
    plus = minimize_branch(spec, ctx, Branch.PLUS, config, constants)
    minus = minimize_branch(spec, ctx, Branch.MINUS, config, constants)
    return plus, minus
