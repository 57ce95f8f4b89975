"""
Report Schemas

This module defines:
- `HeatmapSpec`, the color ramp used for residual and depth images.
- `CompareReport`, the simplified-vs-full comparison of one segment.
- `dumps_document()`, the stable JSON encoding shared by every command.
"""

import json
import math
from typing import Any, Tuple

from pydantic import BaseModel, ConfigDict, Field, computed_field

from models.fit import FitReport

SIGNIFICANT_DIGITS = 9

RGB = Tuple[int, int, int]


class HeatmapSpec(BaseModel):
    """
    Linear blue-to-red color ramp.

    Attributes:
        scale (float): Value mapped to pure red, mm. Larger values are clamped.
        pitch (float): Pixel pitch used when rasterizing points, mm/px.
        low (RGB): Color of 0 mm.
        high (RGB): Color of `scale` mm.
        sentinel (RGB): Color of cells without data.
    """

    model_config = ConfigDict(frozen=True)

    scale: float = Field(1.0, gt=0)
    pitch: float = Field(0.5, gt=0)
    low: RGB = (0, 0, 255)
    high: RGB = (255, 0, 0)
    sentinel: RGB = (128, 128, 128)


class CompareReport(BaseModel):
    """
    Simplified and full fits of the same segment.

    Attributes:
        simplified3 (FitReport): Fit with b = e, p = 1, s = 0 frozen.
        full7 (FitReport): Fit of all seven parameters.
        mae_ratio (float): simplified MAE / full MAE (computed).
    """

    model_config = ConfigDict(frozen=True)

    simplified3: FitReport
    full7: FitReport

    @computed_field
    @property
    def mae_ratio(self) -> float:
        if self.full7.mae == 0.0:
            return 1.0 if self.simplified3.mae == 0.0 else math.inf
        return self.simplified3.mae / self.full7.mae

    def to_document(self) -> dict:
        return {
            "simplified3": self.simplified3.to_document(),
            "full7": self.full7.to_document(),
            "mae_ratio": self.mae_ratio,
        }


def round_significant(value: Any) -> Any:
    """Round every float in a nested structure to 9 significant digits."""
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, float):
        if not math.isfinite(value):
            return None
        return float(f"{value:.{SIGNIFICANT_DIGITS}g}")
    if isinstance(value, dict):
        return {str(k): round_significant(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [round_significant(v) for v in value]
    return value


def dumps_document(document: Any) -> str:
    """
    Encode a report document as stable JSON.

    Keys are sorted and floats rounded to 9 significant digits, so identical
    inputs always produce identical bytes.
    """
    return json.dumps(round_significant(document), sort_keys=True, indent=2) + "\n"
