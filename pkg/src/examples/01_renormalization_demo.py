# examples/01_renormalization_demo.py
"""
Renormalization Demo: Energies on the Gasket Graphs

Shows the one-level harmonic extension of (1, 0, 0), the renormalizing
factor r_p for several exponents, and how the embedding constant K settles
as the graph is refined.
"""

import sys
import os
from rich.console import Console
from rich.table import Table
from rich.panel import Panel
from rich import box

# Add the src directory to the path
sys.path.append(os.path.join(os.path.dirname(__file__), '..'))

from nehari.energy import (
    ApModel,
    EnergyContext,
    estimate_embedding_K,
    estimate_rp,
    p_harmonic_extension,
)
from nehari.geometry.gasket import cached_gasket

console = Console()


def print_header():
    console.print(Panel.fit(
        "[bold cyan]Nehari: Renormalization Demo[/bold cyan]\n"
        "[dim]Harmonic extension, r_p and the embedding constant[/dim]",
        border_style="cyan",
        box=box.DOUBLE
    ))


def show_extension():
    console.print("\n[bold yellow]═══ One-level extension of (1, 0, 0) ═══[/bold yellow]\n")
    table = Table(box=box.ROUNDED)
    table.add_column("p", style="cyan")
    table.add_column("midpoint values (ids 3, 4, 5)")
    for p in (1.5, 2.0, 3.0):
        values = p_harmonic_extension(ApModel(p=p), [1.0, 0.0, 0.0])
        table.add_row(f"{p:g}", ", ".join(f"{x:.6f}" for x in values[3:]))
    console.print(table)
    console.print("[dim]At p = 2 the midpoints are 2/5, 2/5 and 1/5.[/dim]")


def show_rp():
    console.print("\n[bold yellow]═══ Renormalizing factor ═══[/bold yellow]\n")
    table = Table(box=box.ROUNDED)
    table.add_column("p", style="cyan")
    table.add_column("r_p", justify="right")
    table.add_column("spread", justify="right")
    table.add_column("levels", justify="right")
    for p in (1.5, 2.0, 3.0, 4.0):
        est = estimate_rp(ApModel(p=p), max_level=5, tol=1e-6)
        flag = "" if est.converged else " [yellow](not converged)[/yellow]"
        table.add_row(f"{p:g}", f"{est.r_p:.8f}{flag}", f"{est.spread:.2e}", str(est.levels_used))
    console.print(table)


def show_embedding():
    console.print("\n[bold yellow]═══ Embedding constant K at p = 2 ═══[/bold yellow]\n")
    table = Table(box=box.ROUNDED)
    table.add_column("level", style="cyan")
    table.add_column("vertices", justify="right")
    table.add_column("K", justify="right")
    for level in range(1, 6):
        graph = cached_gasket(level)
        ctx = EnergyContext.create(graph, ApModel(p=2.0))
        table.add_row(str(level), str(graph.n_vertices), f"{estimate_embedding_K(ctx):.8f}")
    console.print(table)


def main():
    print_header()
    show_extension()
    show_rp()
    show_embedding()


if __name__ == "__main__":
    main()
