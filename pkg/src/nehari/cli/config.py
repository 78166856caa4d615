# src/nehari/cli/config.py
"""
Run configuration.

A run is described by one JSON file; every value not given falls back to the
defaults documented in docs/CONFIGURATION.md. Command-line flags are applied
on top with RunConfig.with_overrides.
"""

import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

from nehari.core.errors import HypothesisError
from nehari.energy.forms import EnergyContext
from nehari.energy.model import ApModel
from nehari.geometry.gasket import MAX_LEVEL, cached_gasket
from nehari.problem.fibering import Constants, compute_constants
from nehari.problem.fields import FieldSource
from nehari.problem.functional import ProblemSpec, check_hypotheses
from nehari.solver.descent import SolverConfig
from nehari.verify.sampling import SamplingConfig

logger = logging.getLogger(__name__)


class ProblemConfig(BaseModel):
    """Exponents, strengths and coefficient sources."""
    model_config = ConfigDict(populate_by_name=True)

    p: float = Field(2.0, gt=1.0)
    q: float = Field(1.5, gt=0.0)
    alpha: float = Field(1.5, gt=0.0)
    beta: float = Field(1.5, gt=0.0)
    lam: Optional[float] = Field(None, alias="lambda")
    gamma: Optional[float] = None
    strength_fraction: Optional[float] = Field(
        None, gt=0.0, description="choose lambda = gamma with strength = fraction * kappa0"
    )
    level: int = Field(5, ge=0, le=MAX_LEVEL)
    a: FieldSource = Field(default_factory=lambda: FieldSource(preset="one"))
    b: FieldSource = Field(default_factory=lambda: FieldSource(preset="one"))
    h: FieldSource = Field(default_factory=lambda: FieldSource(preset="one"))

    @model_validator(mode="after")
    def _one_way_to_set_strengths(self) -> "ProblemConfig":
        explicit = self.lam is not None or self.gamma is not None
        if explicit and self.strength_fraction is not None:
            raise ValueError("give either lambda/gamma or strength_fraction, not both")
        return self


class SweepConfig(BaseModel):
    lambda_min: float = 0.0
    lambda_max: float = 0.0
    gamma_min: float = 0.0
    gamma_max: float = 0.0
    grid: int = Field(0, ge=0, description="points per axis; 0 gives an empty sweep")


class RunConfig(BaseModel):
    problem: ProblemConfig = Field(default_factory=ProblemConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    sampling: SamplingConfig = Field(default_factory=SamplingConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    output_dir: Path = Path("runs/latest")
    render: bool = True
    k_override: Optional[float] = Field(None, gt=0.0)

    def with_overrides(self, **flags: Any) -> "RunConfig":
        """Apply command-line flags; None means 'not given'."""
        cfg = self
        if flags.get("out") is not None:
            cfg = cfg.model_copy(update={"output_dir": Path(flags["out"])})
        if flags.get("level") is not None:
            cfg = cfg.model_copy(update={"problem": cfg.problem.model_copy(update={"level": flags["level"]})})
        solver_updates = {
            key: flags[flag]
            for flag, key in (("seed", "seed"), ("starts", "starts"), ("tol", "grad_tol"), ("workers", "workers"))
            if flags.get(flag) is not None
        }
        if solver_updates:
            cfg = cfg.model_copy(update={"solver": cfg.solver.model_copy(update=solver_updates)})
        if flags.get("seed") is not None:
            cfg = cfg.model_copy(update={"sampling": cfg.sampling.model_copy(update={"seed": flags["seed"]})})
        if flags.get("k_override") is not None:
            cfg = cfg.model_copy(update={"k_override": flags["k_override"]})
        # round-trip through validation so overrides obey the same constraints
        return RunConfig.model_validate(cfg.model_dump())


def load_config(path: Path) -> RunConfig:
    """Parse a JSON run file."""
    return RunConfig.model_validate_json(Path(path).read_text())


def build_problem(
    config: RunConfig, base_dir: Optional[Path] = None
) -> Tuple[ProblemSpec, EnergyContext, Constants]:
    """
    Resolve coefficient fields, check H1/H3, compute the constants and, when
    strength_fraction is set, pick lambda = gamma on that fraction of kappa0.

    Raises:
        HypothesisError: H1 or H3 fails
    """
    pc = config.problem
    graph = cached_gasket(pc.level)
    spec = ProblemSpec(
        p=pc.p,
        q=pc.q,
        alpha=pc.alpha,
        beta=pc.beta,
        lam=pc.lam or 0.0,
        gamma=pc.gamma or 0.0,
        a=pc.a.resolve(graph, base_dir),
        b=pc.b.resolve(graph, base_dir),
        h=pc.h.resolve(graph, base_dir),
        level=pc.level,
    )
    report = check_hypotheses(spec)
    if not report.ok:
        details = "; ".join(f"{it.name}: {it.detail}" for it in report.items if it.passed is False)
        raise HypothesisError(details, report.failed)

    ctx = EnergyContext.create(graph, ApModel(p=pc.p))
    constants = compute_constants(spec, ctx, config.k_override)
    if pc.strength_fraction is not None:
        denom = spec.a_l1 + spec.b_l1
        value = pc.strength_fraction * constants.kappa0 / denom
        spec = spec.with_strengths(value, value)
        constants = compute_constants(spec, ctx, constants.K).model_copy(
            update={"k_overridden": constants.k_overridden}
        )
        logger.info("strength fraction %.3g gives lambda = gamma = %.10g", pc.strength_fraction, value)
    return spec, ctx, constants


def resolved_echo(config: RunConfig, spec: ProblemSpec) -> Dict[str, Any]:
    """The run configuration with defaults filled and strengths resolved."""
    data = config.model_dump(mode="json", by_alias=True)
    data["problem"]["lambda"] = spec.lam
    data["problem"]["gamma"] = spec.gamma
    return data
