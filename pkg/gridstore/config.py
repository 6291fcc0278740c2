"""
Configuration management for gridstore.

Runtime knobs come from environment variables (GRIDSTORE_*), an optional
.env file, and an optional YAML file named by GRIDSTORE_CONFIG_FILE.
Environment variables win over the YAML file.
"""

import logging
import os
from functools import lru_cache
from typing import Any, Dict, Optional, Tuple

import psutil
import yaml
from pydantic import BaseModel, Field, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from .solver.base import SolverConfig

logger = logging.getLogger(__name__)


def default_thread_count() -> int:
    """Physical core count, falling back to logical cores, then 1."""
    return psutil.cpu_count(logical=False) or psutil.cpu_count() or 1


class RandomInstanceConfig(BaseModel):
    """Parameters of the seeded random-instance generator."""
    max_buses: int = Field(default=8, ge=2, description="Upper bound on bus count")
    max_period: int = Field(default=8, ge=1, description="Upper bound on period T")
    demand_range: Tuple[float, float] = Field(default=(0.0, 10.0), description="Uniform load range")
    c2_range: Tuple[float, float] = Field(default=(0.5, 2.0), description="Uniform quadratic cost range")
    c1_range: Tuple[float, float] = Field(default=(0.0, 1.0), description="Uniform linear cost range")
    admittance_range: Tuple[float, float] = Field(default=(1.0, 10.0), description="Uniform admittance range")
    line_cap_scale: Tuple[float, float] = Field(
        default=(1.0, 2.0),
        description="Line caps drawn as this multiple of the aggregate prefix-average demand floor",
    )
    gen_cap_scale: Tuple[float, float] = Field(default=(1.0, 2.0), description="Generator cap multiple of the floor")
    unbounded_gen_probability: float = Field(default=0.3, ge=0, le=1, description="Chance a generator is uncapped")
    extra_generator_probability: float = Field(default=0.3, ge=0, le=1, description="Chance a non-root bus generates")
    extra_edge_probability: float = Field(default=0.3, ge=0, le=1, description="Chance of each extra mesh edge")
    budget_scale: Tuple[float, float] = Field(default=(0.0, 0.5), description="Budget as multiple of floor times T")
    vary_storage: bool = Field(default=True, description="Draw efficiencies and ramp fractions")

    @model_validator(mode="after")
    def _check_ranges(self) -> "RandomInstanceConfig":
        for name in ("demand_range", "c2_range", "c1_range", "admittance_range",
                     "line_cap_scale", "gen_cap_scale", "budget_scale"):
            lo, hi = getattr(self, name)
            if lo > hi or lo < 0:
                raise ValueError(f"{name} must satisfy 0 <= low <= high, got {(lo, hi)}")
        if self.c2_range[0] <= 0:
            raise ValueError("c2_range must be strictly positive")
        if self.admittance_range[0] <= 0:
            raise ValueError("admittance_range must be strictly positive")
        return self


class Settings(BaseSettings):
    """
    Application settings loaded from environment variables.

    Every field maps to GRIDSTORE_<FIELD>.
    """

    model_config = SettingsConfigDict(
        env_prefix="GRIDSTORE_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Application Settings
    app_name: str = Field(default="gridstore", description="Application name")
    app_version: str = Field(default="1.0.0", description="Application version")
    log_level: str = Field(default="INFO", description="Logging level")
    log_format: str = Field(default="text", description="Log format (text or json)")
    config_file: Optional[str] = Field(default=None, description="Optional YAML settings file")

    # Work pool
    threads: int = Field(default_factory=default_thread_count, ge=1, description="Worker pool size")

    # Solver defaults
    max_iters: int = Field(default=100, ge=1, description="Interior-point iteration limit")
    tol_gap: float = Field(default=1e-8, gt=0, description="Relative duality-gap tolerance")
    tol_feas: float = Field(default=1e-8, gt=0, description="Feasibility tolerance")
    infeasibility_threshold: float = Field(default=1e-6, gt=0, description="Phase-1 infeasibility threshold")
    oracle_iters: int = Field(default=20000, ge=1, description="Default ADMM oracle iterations")

    # Random instances
    instances: RandomInstanceConfig = Field(
        default_factory=RandomInstanceConfig,
        description="Random-instance generator parameters",
    )

    def solver_config(self, verbose: bool = False) -> SolverConfig:
        """Build the solver configuration from settings."""
        return SolverConfig(
            max_iters=self.max_iters,
            tol_gap=self.tol_gap,
            tol_feas=self.tol_feas,
            infeasibility_threshold=self.infeasibility_threshold,
            verbose=verbose,
        )


def load_yaml_settings(filepath: str) -> Dict[str, Any]:
    """
    Load settings overrides from a YAML file.

    Args:
        filepath: Path to YAML file containing a flat mapping of settings

    Returns:
        Mapping of setting name to value (empty if the file is missing)
    """
    try:
        with open(filepath, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f) or {}
    except FileNotFoundError:
        logger.warning(f"Settings file not found: {filepath}")
        return {}
    if not isinstance(data, dict):
        logger.error(f"Settings file {filepath} must contain a mapping")
        return {}
    logger.info(f"Loaded {len(data)} settings from {filepath}")
    return data


@lru_cache()
def get_settings() -> Settings:
    """
    Get cached settings instance.

    Returns:
        Settings instance
    """
    settings = Settings()
    if settings.config_file:
        file_values = load_yaml_settings(settings.config_file)
        env_keys = {
            key[len("GRIDSTORE_"):].lower()
            for key in os.environ
            if key.upper().startswith("GRIDSTORE_")
        }
        merged = {k: v for k, v in file_values.items() if k.lower() not in env_keys}
        if merged:
            settings = Settings(**{**merged, "config_file": settings.config_file})
    return settings
