# src/nehari/solver/__init__.py
from nehari.solver.descent import Solution, SolverConfig, descend_from, minimize_branch, solve_system
from nehari.solver.projection import Branch, Projection, project, project_minus, project_plus

__all__ = [
    "Branch",
    "Projection",
    "project",
    "project_plus",
    "project_minus",
    "SolverConfig",
    "Solution",
    "descend_from",
    "minimize_branch",
    "solve_system",
]
