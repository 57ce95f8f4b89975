"""
Runtime Configuration

This module provides:
- A frozen pydantic `Settings` model holding the defaults used by the pipeline.
- `load_settings()`, which reads overrides from environment variables.

Environment Variables:
    DENTFIT_LOG_LEVEL        - Logging level name (default: INFO)
    DENTFIT_CELL_CAP         - Maximum number of cells in a sampled grid (default: 10000000)
    DENTFIT_DEPTH_THRESHOLD  - Segmentation depth threshold in mm (default: 0.05)
    DENTFIT_CELL             - Segmentation cell size in mm (default: 2.0)
    DENTFIT_MIN_POINTS       - Minimum points per dent segment (default: 50)
    DENTFIT_MULTISTART       - Number of optimizer starts per fit (default: 8)
    DENTFIT_MAX_EVALS        - Objective evaluations per start (default: 20000)
    DENTFIT_RING_WIDTH       - Anchor ring width in mm (default: 4.0)
    DENTFIT_WORKERS          - Threads used for multistart runs (default: 1)
    TESTING                  - If `"true"`, OpenTelemetry log export is disabled

Command-line flags take precedence over every value read here.
"""

import logging
import os
from typing import Mapping, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError

logger = logging.getLogger(__name__)


class Settings(BaseModel):
    """
    Pipeline defaults.

    Attributes:
        log_level (str): Logging level name.
        cell_cap (int): Largest grid (rows * cols) a sampler may allocate.
        depth_threshold (float): Segmentation threshold below the plane, mm.
        cell (float): Segmentation grid cell, mm.
        min_points (int): Segments with fewer points are dropped.
        multistart (int): Optimizer starts per fit.
        max_evals (int): Objective evaluation budget per start.
        ring_width (float): Anchor ring width around a segment, mm.
        workers (int): Threads used to run multistart starts.
        testing (bool): Disables OpenTelemetry log export.
    """

    model_config = ConfigDict(frozen=True)

    log_level: str = "INFO"
    cell_cap: int = Field(10_000_000, gt=0)
    depth_threshold: float = Field(0.05, gt=0)
    cell: float = Field(2.0, gt=0)
    min_points: int = Field(50, ge=1)
    multistart: int = Field(8, ge=1)
    max_evals: int = Field(20_000, ge=1)
    ring_width: float = Field(4.0, ge=0)
    workers: int = Field(1, ge=1)
    testing: bool = False


ENV_KEYS = {
    "log_level": "DENTFIT_LOG_LEVEL",
    "cell_cap": "DENTFIT_CELL_CAP",
    "depth_threshold": "DENTFIT_DEPTH_THRESHOLD",
    "cell": "DENTFIT_CELL",
    "min_points": "DENTFIT_MIN_POINTS",
    "multistart": "DENTFIT_MULTISTART",
    "max_evals": "DENTFIT_MAX_EVALS",
    "ring_width": "DENTFIT_RING_WIDTH",
    "workers": "DENTFIT_WORKERS",
}


def load_settings(environ: Optional[Mapping[str, str]] = None) -> Settings:
    """
    Build `Settings` from environment variables.

    Args:
        environ (Mapping[str, str], optional):
            Variables to read. Defaults to `os.environ`.

    Returns:
        Settings: Defaults overridden by every variable that is set.

    Raises:
        EnvironmentError:
            If any variable cannot be parsed or is out of range. All offending
            variables are named in the message.

    Example:
        >>> settings = load_settings({"DENTFIT_CELL": "1.5"})
        >>> settings.cell
        1.5
    """
    if environ is None:
        environ = os.environ

    values = {}
    for field, key in ENV_KEYS.items():
        value = environ.get(key)
        if value:
            values[field] = value.strip()
    values["testing"] = environ.get("TESTING") == "true"
    if "log_level" in values:
        values["log_level"] = values["log_level"].upper()

    try:
        settings = Settings(**values)
    except ValidationError as e:
        bad_vars = sorted({ENV_KEYS[str(err["loc"][0])] for err in e.errors() if err["loc"]})
        raise EnvironmentError(
            f"Invalid environment variables: {', '.join(bad_vars)}"
        ) from e

    if logging.getLevelName(settings.log_level) == f"Level {settings.log_level}":
        raise EnvironmentError(f"Invalid environment variables: {ENV_KEYS['log_level']}")

    logger.debug(f"Loaded settings: {settings.model_dump()}")
    return settings
