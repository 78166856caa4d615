# src/nehari/energy/__init__.py
from nehari.energy.embedding import HolderReport, embedding_profile, estimate_embedding_K, holder_constant_check
from nehari.energy.forms import (
    EnergyContext,
    EnergyMetric,
    crude_energy,
    energy_gradient,
    energy_norm,
    pair_norm,
    renormalized_energy,
)
from nehari.energy.harmonic import RpEstimate, aitken_limit, default_rp, estimate_rp, p_harmonic_extension, prolong
from nehari.energy.minimize import ConvexResult, LineSearch, backtrack, minimize_convex
from nehari.energy.model import ApModel, ap_eval

__all__ = [
    "ApModel",
    "ap_eval",
    "EnergyContext",
    "EnergyMetric",
    "crude_energy",
    "renormalized_energy",
    "energy_norm",
    "energy_gradient",
    "pair_norm",
    "p_harmonic_extension",
    "prolong",
    "RpEstimate",
    "estimate_rp",
    "aitken_limit",
    "default_rp",
    "estimate_embedding_K",
    "embedding_profile",
    "HolderReport",
    "holder_constant_check",
    "ConvexResult",
    "LineSearch",
    "backtrack",
    "minimize_convex",
]
