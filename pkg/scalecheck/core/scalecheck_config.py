"""Configuration module for scalecheck operations."""

import os
from dataclasses import dataclass, field

from dotenv import load_dotenv

# Load environment variables
load_dotenv(os.path.join(os.path.dirname(__file__), "..", ".env"))


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(name, str(default)))


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(name, str(default)))


def _env_bool(name: str, default: bool) -> bool:
    return os.getenv(name, str(default)).strip().lower() in {"1", "true", "yes", "on"}


@dataclass
class ScaleCheckConfig:
    """Configuration for estimation, testing and reporting."""

    # Optimizer
    max_iterations: int = field(default_factory=lambda: _env_int("SCALECHECK_MAX_ITERATIONS", 500))
    gradient_tolerance: float = field(
        default_factory=lambda: _env_float("SCALECHECK_GRADIENT_TOLERANCE", 1e-9)
    )
    relative_f_tolerance: float = field(
        default_factory=lambda: _env_float("SCALECHECK_RELATIVE_F_TOLERANCE", 1e-12)
    )
    armijo_c1: float = field(default_factory=lambda: _env_float("SCALECHECK_ARMIJO_C1", 1e-4))
    min_step: float = field(default_factory=lambda: _env_float("SCALECHECK_MIN_STEP", 1e-20))

    # Testing
    default_alpha: float = field(default_factory=lambda: _env_float("SCALECHECK_ALPHA", 0.05))
    nesting_slack: float = field(default_factory=lambda: _env_float("SCALECHECK_NESTING_SLACK", 1e-6))
    zero_loading_tolerance: float = field(
        default_factory=lambda: _env_float("SCALECHECK_ZERO_LOADING_TOLERANCE", 1e-10)
    )
    allow_mixed_markers: bool = field(
        default_factory=lambda: _env_bool("SCALECHECK_ALLOW_MIXED_MARKERS", False)
    )

    # Runtime
    max_workers: int = field(default_factory=lambda: _env_int("SCALECHECK_MAX_WORKERS", 4))
    log_level: str = field(default_factory=lambda: os.getenv("SCALECHECK_LOG_LEVEL", "INFO"))
    display_decimals: int = field(default_factory=lambda: _env_int("SCALECHECK_DISPLAY_DECIMALS", 5))


# Global configuration instance
scalecheck_config = ScaleCheckConfig()
