# examples/02_two_solutions_demo.py
"""
Two Solutions Demo: Plus and Minus Branches

Solves the coupled system at level 4 with a = b = h = 1 and strength
0.6 kappa0, then certifies the pair of minimizers.
"""

import sys
import os
from rich.console import Console
from rich.panel import Panel
from rich import box

# Add the src directory to the path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from nehari.cli.artifacts import certificate_table, constants_table, solutions_table
from nehari.cli.config import ProblemConfig, RunConfig, build_problem
from nehari.problem.fibering import lambda_region
from nehari.solver.descent import SolverConfig, solve_system
from nehari.verify.certificate import certify
from nehari.verify.sampling import SamplingConfig

console = Console()


def main():
    console.print(Panel.fit(
        "[bold cyan]Nehari: Two Solutions Demo[/bold cyan]\n"
        "[dim]Concave-convex coupling on the level-4 gasket[/dim]",
        border_style="cyan",
        box=box.DOUBLE
    ))

    config = RunConfig(
        problem=ProblemConfig(level=4, strength_fraction=0.6),
        solver=SolverConfig(starts=4),
        sampling=SamplingConfig(nehari_samples=200, holder_fields=20, embedding_fields=200),
    )
    spec, ctx, constants = build_problem(config)
    console.print(constants_table(
        constants, lambda_region(spec, constants), lambda_region(spec, constants, signed=True)
    ))

    with console.status("[bold green]descending on both branches..."):
        plus, minus = solve_system(spec, ctx, config.solver, constants)
    console.print(solutions_table([plus, minus]))

    cert = certify(spec, ctx, plus, minus, constants, config.sampling, config.solver.grad_tol)
    console.print(certificate_table(cert))

    verdict = "[bold green]passed[/bold green]" if cert.passed else f"[bold red]failed[/bold red]: {', '.join(cert.failed)}"
    console.print(f"\nCertificate {verdict}")
    console.print(f"[dim]I+ = {plus.I_value:.8g}, d0 = {constants.d0:.8g}, I- = {minus.I_value:.8g}[/dim]\n")


if __name__ == "__main__":
    main()
