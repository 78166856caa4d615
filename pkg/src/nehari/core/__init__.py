# src/nehari/core/__init__.py
"""
Shared infrastructure: exceptions and runtime defaults.
"""

from nehari.core.errors import (
    NehariError,
    LevelMismatchError,
    AddressError,
    HypothesisError,
    ConvergenceError,
    BracketError,
    AdmissibleStartError,
    OffManifoldError,
)

from nehari.core.settings import Settings, get_settings

__all__ = [
    "NehariError",
    "LevelMismatchError",
    "AddressError",
    "HypothesisError",
    "ConvergenceError",
    "BracketError",
    "AdmissibleStartError",
    "OffManifoldError",
    "Settings",
    "get_settings",
]
