# src/nehari/cli/main.py
"""
Command-line entry point.

    python -m nehari solve --config run.json [--out DIR] [--seed N] ...
    python -m nehari rp --p 3 --max-level 7
    python -m nehari constants --config run.json [--k-override 1]
    python -m nehari sweep --config run.json --grid 4
    python -m nehari render runs/latest/solution_plus.csv --out plus.svg

Exit codes: 0 success, 1 hypothesis or input failure, 2 solver failure,
3 certificate failure.
"""

import argparse
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel

from nehari.cli.artifacts import (
    certificate_table,
    constants_table,
    read_solution_table,
    solutions_table,
    write_solution_table,
    write_sweep_csv,
)
from nehari.cli.config import RunConfig, build_problem, load_config, resolved_echo
from nehari.cli.render import render_field
from nehari.core.errors import (
    AdmissibleStartError,
    BracketError,
    ConvergenceError,
    HypothesisError,
    NehariError,
)
from nehari.core.settings import get_settings
from nehari.energy.forms import EnergyContext
from nehari.energy.harmonic import estimate_rp
from nehari.energy.model import ApModel
from nehari.problem.fibering import ParameterRegion, compute_constants, lambda_region
from nehari.problem.functional import ProblemSpec
from nehari.solver.descent import SolverConfig, solve_system
from nehari.verify.certificate import certify
from nehari.verify.sampling import SamplingConfig

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_HYPOTHESIS = 1
EXIT_SOLVER = 2
EXIT_CERTIFICATE = 3

SOLVER_ERRORS = (AdmissibleStartError, BracketError, ConvergenceError)


def setup_logging(level: Optional[str] = None) -> None:
    level = (level or get_settings().log_level).upper()
    logging.basicConfig(
        level=level,
        format="%(message)s",
        datefmt="[%X]",
        handlers=[RichHandler(show_path=False)],
        force=True,
    )


def _load(args: argparse.Namespace) -> Tuple[RunConfig, Optional[Path]]:
    if args.config:
        path = Path(args.config)
        config, base_dir = load_config(path), path.parent
    else:
        config, base_dir = RunConfig(), None
    return config.with_overrides(
        out=getattr(args, "out", None),
        level=getattr(args, "level", None),
        seed=getattr(args, "seed", None),
        starts=getattr(args, "starts", None),
        tol=getattr(args, "tol", None),
        workers=getattr(args, "workers", None),
        k_override=getattr(args, "k_override", None),
    ), base_dir


def cmd_solve(args: argparse.Namespace, console: Console) -> int:
    try:
        config, base_dir = _load(args)
        spec, ctx, constants = build_problem(config, base_dir)
    except HypothesisError as e:
        console.print(f"[red]hypothesis failure[/red] ({', '.join(e.failed)}): {e}")
        return EXIT_HYPOTHESIS
    except (ValidationError, OSError, ValueError) as e:
        console.print(f"[red]invalid input[/red]: {e}")
        return EXIT_HYPOTHESIS

    region = lambda_region(spec, constants)
    console.print(constants_table(constants, region, lambda_region(spec, constants, signed=True)))
    try:
        plus, minus = solve_system(spec, ctx, config.solver, constants)
    except HypothesisError as e:
        console.print(f"[red]hypothesis failure[/red] ({', '.join(e.failed)}): {e}")
        return EXIT_HYPOTHESIS
    except SOLVER_ERRORS as e:
        console.print(f"[red]solver failure[/red]: {e}")
        return EXIT_SOLVER
    console.print(solutions_table([plus, minus]))

    cert = certify(
        spec, ctx, plus, minus,
        constants=constants,
        sampling=config.sampling,
        grad_tol=config.solver.grad_tol,
        config_echo=resolved_echo(config, spec),
    )
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_solution_table(out / "solution_plus.csv", ctx.graph, plus.u, plus.v)
    write_solution_table(out / "solution_minus.csv", ctx.graph, minus.u, minus.v)
    cert.export_to_json(out / "certificate.json")
    if config.render:
        for sol in (plus, minus):
            for name, field in (("u", sol.u), ("v", sol.v)):
                render_field(ctx.graph, field, out / f"{sol.branch.value}_{name}.svg",
                             title=f"{name} on the {sol.branch.value} branch")

    if not cert.passed:
        console.print(certificate_table(cert, only_failed=True))
        console.print(f"[red]certificate failed[/red]: {', '.join(cert.failed)}")
        return EXIT_CERTIFICATE
    console.print(Panel.fit(
        f"[bold green]certificate passed[/bold green]\n"
        f"I+ = {plus.I_value:.10g} < 0 < d0 = {constants.d0:.10g} < I- = {minus.I_value:.10g}\n"
        f"[dim]artifacts in {out}[/dim]",
        border_style="green",
    ))
    return EXIT_OK


def cmd_rp(args: argparse.Namespace, console: Console) -> int:
    try:
        estimate = estimate_rp(ApModel(p=args.p), args.max_level, args.tol)
    except (ValidationError, ValueError) as e:
        console.print(f"[red]invalid input[/red]: {e}")
        return EXIT_HYPOTHESIS
    except ConvergenceError as e:
        console.print(f"[red]solver failure[/red]: {e}")
        return EXIT_SOLVER
    console.print(f"r_p = {estimate.r_p!r}")
    console.print(f"spread = {estimate.spread:.3e} after {estimate.levels_used} levels")
    if not estimate.converged:
        console.print(f"[yellow]not converged[/yellow]: spread above tol {args.tol:g} at max level {args.max_level}")
        if estimate.extrapolated is not None:
            console.print(f"Aitken limit = {estimate.extrapolated!r}")
    return EXIT_OK


def cmd_constants(args: argparse.Namespace, console: Console) -> int:
    try:
        config, base_dir = _load(args)
        spec, _, constants = build_problem(config, base_dir)
    except HypothesisError as e:
        console.print(f"[red]hypothesis failure[/red] ({', '.join(e.failed)}): {e}")
        return EXIT_HYPOTHESIS
    except (ValidationError, OSError, ValueError) as e:
        console.print(f"[red]invalid input[/red]: {e}")
        return EXIT_HYPOTHESIS
    console.print(constants_table(
        constants, lambda_region(spec, constants), lambda_region(spec, constants, signed=True)
    ))
    return EXIT_OK


def _sweep_point(
    spec: ProblemSpec,
    ctx: EnergyContext,
    K: float,
    lam: float,
    gamma: float,
    solver: SolverConfig,
    sampling: SamplingConfig,
) -> Tuple:
    point = spec.with_strengths(lam, gamma)
    constants = compute_constants(point, ctx, k_override=K)
    if lambda_region(point, constants) is not ParameterRegion.INSIDE_LAMBDA0:
        return (lam, gamma, None, None, constants.d0, "H2-fail")
    try:
        plus, minus = solve_system(point, ctx, solver.model_copy(update={"workers": 1}), constants)
    except (HypothesisError, *SOLVER_ERRORS) as e:
        logger.warning("sweep point (%g, %g) failed: %s", lam, gamma, e)
        return (lam, gamma, None, None, constants.d0, "solver-fail")
    cert = certify(point, ctx, plus, minus, constants=constants, sampling=sampling, grad_tol=solver.grad_tol)
    return (lam, gamma, plus.I_value, minus.I_value, constants.d0, "pass" if cert.passed else "fail")


def sweep_grid(config: RunConfig) -> List[Tuple[float, float]]:
    sw = config.sweep
    if sw.grid == 0:
        return []
    lams = np.linspace(sw.lambda_min, sw.lambda_max, sw.grid)
    gammas = np.linspace(sw.gamma_min, sw.gamma_max, sw.grid)
    return [(float(l), float(g)) for l in lams for g in gammas]


def cmd_sweep(args: argparse.Namespace, console: Console) -> int:
    try:
        config, base_dir = _load(args)
        if args.grid is not None or args.lambda_range or args.gamma_range:
            updates = {}
            if args.grid is not None:
                updates["grid"] = args.grid
            if args.lambda_range:
                updates["lambda_min"], updates["lambda_max"] = args.lambda_range
            if args.gamma_range:
                updates["gamma_min"], updates["gamma_max"] = args.gamma_range
            config = config.model_copy(update={"sweep": config.sweep.model_copy(update=updates)})
        spec, ctx, constants = build_problem(config, base_dir)
    except HypothesisError as e:
        console.print(f"[red]hypothesis failure[/red] ({', '.join(e.failed)}): {e}")
        return EXIT_HYPOTHESIS
    except (ValidationError, OSError, ValueError) as e:
        console.print(f"[red]invalid input[/red]: {e}")
        return EXIT_HYPOTHESIS

    grid = sweep_grid(config)

    def run(point: Tuple[float, float]) -> Tuple:
        return _sweep_point(spec, ctx, constants.K, point[0], point[1], config.solver, config.sampling)

    if config.solver.workers > 1 and len(grid) > 1:
        with ThreadPoolExecutor(max_workers=config.solver.workers) as pool:
            rows = list(pool.map(run, grid))
    else:
        rows = [run(point) for point in grid]

    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    write_sweep_csv(out / "sweep.csv", rows)
    failed = sum(1 for row in rows if row[-1] in ("fail", "solver-fail"))
    gated = sum(1 for row in rows if row[-1] == "H2-fail")
    console.print(f"{len(rows)} grid points: {len(rows) - failed - gated} passed, {gated} outside Lambda_0, {failed} failed")
    return EXIT_CERTIFICATE if failed else EXIT_OK


def cmd_render(args: argparse.Namespace, console: Console) -> int:
    try:
        table = read_solution_table(args.solution)
    except (OSError, ValueError) as e:
        console.print(f"[red]cannot read solution[/red]: {e}")
        return EXIT_HYPOTHESIS
    source = Path(args.solution)
    out = Path(args.out) if args.out else source.with_suffix(".svg")
    stem = out.with_suffix("")
    fields = {"u": table.u, "v": table.v}
    names = ["u", "v"] if args.component == "both" else [args.component]
    for name in names:
        target = stem.with_name(f"{stem.name}_{name}.svg") if len(names) > 1 else out
        target.parent.mkdir(parents=True, exist_ok=True)
        render_field(table.graph, fields[name], target, title=f"{name} from {source.name}")
        console.print(f"wrote {target}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nehari",
        description="Two-branch Nehari solver for the coupled p-Laplacian system on the Sierpinski gasket.",
    )
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (default: NEHARI_LOG_LEVEL or INFO)")
    sub = parser.add_subparsers(dest="command", required=True)

    def run_flags(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", type=str, default=None, help="JSON run file")
        p.add_argument("--out", type=str, default=None, help="Output directory")
        p.add_argument("--seed", type=int, default=None, help="Seed for starts and sampling")
        p.add_argument("--level", type=int, default=None, help="Graph level m")
        p.add_argument("--starts", type=int, default=None, help="Random starts per branch")
        p.add_argument("--tol", type=float, default=None, help="Residual tolerance grad_tol")
        p.add_argument("--workers", type=int, default=None, help="Thread cap for starts and sweeps")
        p.add_argument("--k-override", type=float, default=None, dest="k_override",
                       help="Use this embedding constant K instead of computing it")

    p_solve = sub.add_parser("solve", help="Compute and certify both branch minimizers")
    run_flags(p_solve)
    p_solve.set_defaults(handler=cmd_solve)

    settings = get_settings()
    p_rp = sub.add_parser("rp", help="Estimate the renormalizing factor r_p")
    p_rp.add_argument("--p", type=float, default=2.0, help="Energy exponent (default: 2)")
    p_rp.add_argument("--max-level", type=int, default=settings.rp_max_level, dest="max_level")
    p_rp.add_argument("--tol", type=float, default=settings.rp_tol)
    p_rp.set_defaults(handler=cmd_rp)

    p_const = sub.add_parser("constants", help="Print K, kappa, kappa0, d0 and the region of (lambda, gamma)")
    run_flags(p_const)
    p_const.set_defaults(handler=cmd_constants)

    p_sweep = sub.add_parser("sweep", help="Solve and certify over a (lambda, gamma) grid")
    run_flags(p_sweep)
    p_sweep.add_argument("--grid", type=int, default=None, help="Points per axis")
    p_sweep.add_argument("--lambda-range", type=float, nargs=2, default=None, dest="lambda_range")
    p_sweep.add_argument("--gamma-range", type=float, nargs=2, default=None, dest="gamma_range")
    p_sweep.set_defaults(handler=cmd_sweep)

    p_render = sub.add_parser("render", help="Render a solution table as SVG")
    p_render.add_argument("solution", type=str, help="solution_*.csv written by solve")
    p_render.add_argument("--out", type=str, default=None, help="Output SVG path")
    p_render.add_argument("--component", choices=["u", "v", "both"], default="both")
    p_render.set_defaults(handler=cmd_render)
    return parser


def main(argv: Optional[Sequence[str]] = None, console: Optional[Console] = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.log_level)
    console = console or Console()
    try:
        return args.handler(args, console)
    except NehariError as e:
        console.print(f"[red]error[/red]: {e}")
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
