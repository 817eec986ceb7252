"""Configuration module for the SBN estimation toolkit.

Uses pydantic-settings for environment variable loading and validation.
All variables share the ``SBN_`` prefix (e.g. ``SBN_ENUM_CAP=11``).
"""

from enum import Enum
from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


class LogFormat(str, Enum):
    """Log output format."""

    CONSOLE = "console"
    JSON = "json"


class KlDirection(str, Enum):
    """Which distribution plays the role of ``a`` in sum a log(a/b)."""

    ESTIMATE_TO_TARGET = "estimate_to_target"
    TARGET_TO_ESTIMATE = "target_to_estimate"


class KlSupport(str, Enum):
    """Set of trees a KL divergence is summed over."""

    TARGET = "target"
    ESTIMATE = "estimate"
    UNION = "union"


class Settings(BaseSettings):
    """Application settings loaded from environment variables.

    Environment variables can be set directly or via a .env file.
    """

    model_config = SettingsConfigDict(
        env_prefix="SBN_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        extra="ignore",
    )

    # Tree space
    enum_cap: int = Field(
        default=10,
        ge=3,
        description="Largest taxon count for exhaustive tree enumeration",
    )

    # EM defaults
    em_max_iters: int = Field(
        default=200,
        gt=0,
        description="Maximum number of EM iterations",
    )
    em_rel_tol: float = Field(
        default=1e-6,
        gt=0,
        description="Stop EM when the per-tree log-likelihood change drops below this",
    )

    # KL defaults
    kl_direction: KlDirection = Field(
        default=KlDirection.ESTIMATE_TO_TARGET,
        description="Default KL direction",
    )
    kl_support: KlSupport = Field(
        default=KlSupport.UNION,
        description="Default KL summation support",
    )
    kl_epsilon_floor: float = Field(
        default=0.0,
        ge=0.0,
        lt=1e-3,
        description="Floor applied to the denominator distribution (0 disables)",
    )

    # Logging configuration
    log_level: Literal["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"] = Field(
        default="INFO",
        description="Logging level",
    )
    log_format: LogFormat = Field(
        default=LogFormat.CONSOLE,
        description="Log output format: console or json",
    )


@lru_cache
def get_settings() -> Settings:
    """Get cached application settings.

    Uses lru_cache to ensure settings are only loaded once.
    Call get_settings.cache_clear() to reload settings if needed.
    """
    return Settings()
