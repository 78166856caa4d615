# src/nehari/problem/__init__.py
from nehari.problem.fibering import (
    Constants,
    FiberingCase,
    FiberingDiagnostics,
    ManifoldClass,
    NehariRoot,
    ParameterRegion,
    RootBranch,
    classify,
    compute_constants,
    diagnose,
    fibering_from_scalars,
    lambda_region,
    m_function,
    m_prime,
    nehari_roots,
    phi,
    phi_double_prime,
    phi_prime,
    t_max,
    tmax_value_lower_bound,
)
from nehari.problem.fields import FieldSource, VertexField, preset_bump, preset_one, read_field, write_field
from nehari.problem.functional import (
    HypothesisItem,
    HypothesisReport,
    ProblemSpec,
    check_hypotheses,
    euler_functional,
    euler_gradient,
    integrate,
    l1_norm,
    pair_energy,
    term_concave,
    term_coupling,
)

__all__ = [
    "VertexField",
    "FieldSource",
    "preset_one",
    "preset_bump",
    "read_field",
    "write_field",
    "ProblemSpec",
    "integrate",
    "l1_norm",
    "term_concave",
    "term_coupling",
    "pair_energy",
    "euler_functional",
    "euler_gradient",
    "HypothesisItem",
    "HypothesisReport",
    "check_hypotheses",
    "FiberingCase",
    "FiberingDiagnostics",
    "NehariRoot",
    "RootBranch",
    "ManifoldClass",
    "ParameterRegion",
    "Constants",
    "diagnose",
    "fibering_from_scalars",
    "phi",
    "phi_prime",
    "phi_double_prime",
    "m_function",
    "m_prime",
    "t_max",
    "nehari_roots",
    "classify",
    "compute_constants",
    "tmax_value_lower_bound",
    "lambda_region",
]
