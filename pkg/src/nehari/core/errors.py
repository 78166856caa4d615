# src/nehari/core/errors.py
"""
Exception hierarchy.

Report-style operations (hypothesis checks, certificates) never raise for a
failed item; everything else signals through these classes.
"""

from typing import Any, List, Optional


class NehariError(Exception):
    """Base class for every error raised by the package."""


class LevelMismatchError(NehariError, ValueError):
    """A field does not have one value per vertex of the graph it is used on."""

    def __init__(self, expected: int, got: int, what: str = "field"):
        super().__init__(f"{what} has {got} values, graph has {expected} vertices")
        self.expected = expected
        self.got = got


class AddressError(NehariError, ValueError):
    """A cell word is malformed or has the wrong length."""


class HypothesisError(NehariError, ValueError):
    """A structural hypothesis or a parameter-region gate failed."""

    def __init__(self, message: str, failed: Optional[List[str]] = None):
        super().__init__(message)
        self.failed = list(failed or [])


class ConvergenceError(NehariError, RuntimeError):
    """An iterative minimizer hit its iteration cap."""

    def __init__(self, message: str, best: Any = None, residual: float = float("nan")):
        super().__init__(message)
        self.best = best
        self.residual = residual


class BracketError(NehariError, RuntimeError):
    """A Nehari root could not be bracketed."""


class AdmissibleStartError(NehariError, RuntimeError):
    """No random start met the sign condition a branch projection needs."""

    def __init__(self, message: str, condition: str):
        super().__init__(message)
        self.condition = condition


class OffManifoldError(NehariError, ValueError):
    """A routine defined on the Nehari set received a pair off the set."""
