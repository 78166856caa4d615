# src/nehari/cli/artifacts.py
"""Solution tables, sweep CSVs and console summaries."""

import csv
from pathlib import Path
from typing import Iterable, List, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict
from rich import box
from rich.table import Table

from nehari.geometry.gasket import GasketGraph, cached_gasket, level_from_vertex_count
from nehari.problem.fibering import Constants, ParameterRegion
from nehari.solver.descent import Solution
from nehari.verify.certificate import Certificate

SOLUTION_HEADER = ("id", "word", "x", "y", "weight", "u", "v")
SWEEP_HEADER = ("lambda", "gamma", "I_plus", "I_minus", "d0", "pass")


class SolutionTable(BaseModel):
    """Fields read back from a solution file."""
    model_config = ConfigDict(arbitrary_types_allowed=True)

    level: int
    u: np.ndarray
    v: np.ndarray

    @property
    def graph(self) -> GasketGraph:
        return cached_gasket(self.level)


def write_solution_table(path: Union[str, Path], graph: GasketGraph, u: np.ndarray, v: np.ndarray) -> None:
    """One row per vertex; floats written with repr so reading back is exact."""
    u = graph.check_field(u, "u")
    v = graph.check_field(v, "v")
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SOLUTION_HEADER)
        for i in range(graph.n_vertices):
            x, y = graph.vertices[i]
            writer.writerow([
                i,
                graph.vertex_words[i],
                repr(float(x)),
                repr(float(y)),
                repr(float(graph.vertex_weight[i])),
                repr(float(u[i])),
                repr(float(v[i])),
            ])


def read_solution_table(path: Union[str, Path]) -> SolutionTable:
    """
    Raises:
        FileNotFoundError: missing file
        ValueError: bad header, ids out of order, or a row count that is not a gasket vertex count
    """
    with open(path, newline="") as f:
        rows = list(csv.reader(f))
    if not rows or tuple(rows[0]) != SOLUTION_HEADER:
        raise ValueError(f"{path}: expected header {','.join(SOLUTION_HEADER)}")
    body = rows[1:]
    for expected, row in enumerate(body):
        if int(row[0]) != expected:
            raise ValueError(f"{path}: row {expected + 1} has id {row[0]}")
    level = level_from_vertex_count(len(body))
    u = np.array([float(row[5]) for row in body])
    v = np.array([float(row[6]) for row in body])
    return SolutionTable(level=level, u=u, v=v)


def write_sweep_csv(path: Union[str, Path], rows: Iterable[Tuple]) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(SWEEP_HEADER)
        for row in rows:
            writer.writerow(["" if x is None else (repr(x) if isinstance(x, float) else x) for x in row])


def constants_table(constants: Constants, region: ParameterRegion, signed_region: ParameterRegion) -> Table:
    table = Table(title="Constants", box=box.ROUNDED)
    table.add_column("quantity", style="cyan")
    table.add_column("value", justify="right")
    rows = [
        ("K" + (" (override)" if constants.k_overridden else ""), constants.K),
        ("kappa", constants.kappa),
        ("kappa0", constants.kappa0),
        ("d0", constants.d0),
        ("||a||_1", constants.a_l1),
        ("||b||_1", constants.b_l1),
        ("||h||_1", constants.h_l1),
        ("|lambda| ||a||_1 + |gamma| ||b||_1", constants.strength),
        ("minus-branch norm bound", constants.minus_norm_lower_bound),
    ]
    for name, value in rows:
        table.add_row(name, f"{value:.10g}")
    table.add_row("region", region.value)
    table.add_row("region (signed form)", signed_region.value)
    return table


def solutions_table(solutions: List[Solution]) -> Table:
    table = Table(title="Branch minimizers", box=box.ROUNDED)
    for col in ("branch", "I", "Phi'(1)", "Phi''(1)", "residual", "iterations", "start", "converged"):
        table.add_column(col)
    for s in solutions:
        table.add_row(
            s.branch.value,
            f"{s.I_value:.10g}",
            f"{s.phi1:.2e}",
            f"{s.phi2:.4g}",
            f"{s.grad_dual_norm:.2e}",
            str(s.iterations),
            str(s.start_index),
            "yes" if s.converged else "[red]no[/red]",
        )
    return table


def certificate_table(cert: Certificate, only_failed: bool = False) -> Table:
    table = Table(title="Certificate", box=box.SIMPLE)
    for col in ("item", "value", "threshold", "result"):
        table.add_column(col)
    for it in cert.items:
        if only_failed and (it.passed or not it.gating):
            continue
        result = "[green]pass[/green]" if it.passed else "[red]FAIL[/red]"
        if not it.gating:
            result = "[dim]info[/dim]"
        table.add_row(
            it.name,
            "" if it.value is None else f"{it.value:.6g}",
            "" if it.threshold is None else f"{it.threshold:.6g}",
            result,
        )
    return table
