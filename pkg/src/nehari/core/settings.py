# src/nehari/core/settings.py
"""
Runtime defaults.

Every numeric default used by the command-line surface lives here; the table
in docs/CONFIGURATION.md mirrors this module. A few values can be overridden
from the environment (or a local .env file).
"""

import os
from functools import lru_cache

from dotenv import load_dotenv
from pydantic import BaseModel, Field

# Load environment variables from .env file
load_dotenv()


class Settings(BaseModel):
    """Process-wide defaults, optionally overridden by NEHARI_* variables."""
    log_level: str = Field("INFO", description="Root log level for the CLI")
    seed: int = Field(1729, description="Default seed for random starts and sampling")
    workers: int = Field(1, ge=1, description="Worker cap for multistart and sweeps")
    rp_max_level: int = Field(7, ge=2, description="Deepest level used to estimate r_p")
    rp_tol: float = Field(1e-8, gt=0, description="Ratio spread that counts as converged")


@lru_cache(maxsize=1)
def get_settings() -> Settings:
    """Read NEHARI_* overrides once per process."""
    overrides = {}
    env_map = {
        "NEHARI_LOG_LEVEL": "log_level",
        "NEHARI_SEED": "seed",
        "NEHARI_WORKERS": "workers",
        "NEHARI_RP_MAX_LEVEL": "rp_max_level",
        "NEHARI_RP_TOL": "rp_tol",
    }
    for var, key in env_map.items():
        value = os.getenv(var)
        if value:
            overrides[key] = value
    return Settings(**overrides)
