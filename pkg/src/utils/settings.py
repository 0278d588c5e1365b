"""
Runtime configuration for the Schwinger toolkit.

Values come from environment variables (optionally through a ``.env`` file
picked up by python-dotenv). Every variable is optional; invalid values raise
ValueError naming the offending variable.

Variables:
    SCHWINGER_SEED             seed for randomized verification suites (42)
    SCHWINGER_SYMBOL_TWO_JMAX  2*j_max for Weyl-symbol computations (3)
    SCHWINGER_ALGEBRA_TWO_JMAX 2*j_max for purely algebraic checks (8)
    SCHWINGER_FD_STEP          central finite-difference step (1e-5)
    SCHWINGER_ANTIPODE_EPS     cut-off of the exponential-coordinate radius (1e-3)
    SCHWINGER_XGRID            polar,azimuth,radial node counts ("8,16,32")
    SCHWINGER_WORKERS          worker threads for verify fan-out (1)
    SCHWINGER_LOGS_DIR         directory of the human-readable run logs ("logs")
    SCHWINGER_TOLERANCES_FILE  tolerance table (config/tolerances.json)
"""

import json
import os
import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, Tuple

from dotenv import load_dotenv

logger = logging.getLogger(__name__)

PROJECT_ROOT = Path(__file__).parent.parent.parent
DEFAULT_TOLERANCES_FILE = PROJECT_ROOT / "config" / "tolerances.json"


@dataclass(frozen=True)
class Settings:
    """Immutable snapshot of the toolkit configuration."""
    seed: int = 42
    symbol_two_j_max: int = 3
    algebra_two_j_max: int = 8
    fd_step: float = 1e-5
    antipode_eps: float = 1e-3
    x_grid: Tuple[int, int, int] = (8, 16, 32)
    workers: int = 1
    logs_dir: str = "logs"
    tolerances_file: str = str(DEFAULT_TOLERANCES_FILE)

    def with_overrides(self, **overrides: Any) -> "Settings":
        """Return a copy with the non-None overrides applied (CLI flags)."""
        changes = {key: value for key, value in overrides.items() if value is not None}
        return replace(self, **changes)


def _int_env(name: str, default: int, minimum: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}")
    if value < minimum:
        raise ValueError(f"{name} must be >= {minimum}, got {value}")
    return value


def _float_env(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = float(raw)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {raw!r}")
    if not value > 0.0:
        raise ValueError(f"{name} must be positive, got {value}")
    return value


def parse_grid_triple(raw: str, name: str = "grid") -> Tuple[int, int, int]:
    """Parse an ``a,b,c`` node-count triple, as used by SCHWINGER_XGRID and --grid."""
    parts = [part.strip() for part in raw.split(",")]
    if len(parts) != 3:
        raise ValueError(f"{name} must have three comma-separated counts, got {raw!r}")
    try:
        counts = tuple(int(part) for part in parts)
    except ValueError:
        raise ValueError(f"{name} must contain integers, got {raw!r}")
    if min(counts) < 1:
        raise ValueError(f"{name} counts must be positive, got {raw!r}")
    return counts  # type: ignore[return-value]


def load_settings() -> Settings:
    """
    Build Settings from the environment.

    Returns:
        Settings with defaults for every variable that is not set

    Raises:
        ValueError: If a variable is set to an invalid value
    """
    load_dotenv()

    x_grid_raw = os.getenv("SCHWINGER_XGRID")
    x_grid = parse_grid_triple(x_grid_raw, "SCHWINGER_XGRID") if x_grid_raw else Settings.x_grid

    settings = Settings(
        seed=_int_env("SCHWINGER_SEED", Settings.seed, 0),
        symbol_two_j_max=_int_env("SCHWINGER_SYMBOL_TWO_JMAX", Settings.symbol_two_j_max, 0),
        algebra_two_j_max=_int_env("SCHWINGER_ALGEBRA_TWO_JMAX", Settings.algebra_two_j_max, 0),
        fd_step=_float_env("SCHWINGER_FD_STEP", Settings.fd_step),
        antipode_eps=_float_env("SCHWINGER_ANTIPODE_EPS", Settings.antipode_eps),
        x_grid=x_grid,
        workers=_int_env("SCHWINGER_WORKERS", Settings.workers, 1),
        logs_dir=os.getenv("SCHWINGER_LOGS_DIR") or Settings.logs_dir,
        tolerances_file=os.getenv("SCHWINGER_TOLERANCES_FILE") or Settings.tolerances_file,
    )
    logger.debug(f"Loaded settings: {settings}")
    return settings


def load_tolerances(path: str) -> Dict[str, Dict[str, Any]]:
    """
    Load the per-check tolerance table.

    Args:
        path: JSON file mapping check id -> {"tolerance": float, "description": str}

    Raises:
        FileNotFoundError: If the file does not exist
        ValueError: If the file is not valid JSON or misses a tolerance
    """
    config_path = Path(path)
    if not config_path.exists():
        raise FileNotFoundError(f"Tolerance file not found: {config_path}")
    try:
        with open(config_path, 'r', encoding='utf-8') as f:
            table = json.load(f)
    except json.JSONDecodeError as e:
        raise ValueError(f"Invalid JSON in tolerance file: {e}")

    for check_id, entry in table.items():
        if "tolerance" not in entry:
            raise ValueError(f"Tolerance entry '{check_id}' has no 'tolerance' field")
    return table
