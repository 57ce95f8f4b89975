"""
Dent Model Schemas

This module defines:
- `DentParams`, the seven parameters of the dent model.
- `RefPoint`, a location in the unit reference frame.
- `Pose`, the in-plane placement of a dent.
- `HeightField`, a sampled grid of signed heights.
- `SrmMeasures`, the traditional length/width/depth description.

All schemas are frozen.
"""

import math
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator


class DentParams(BaseModel):
    """
    Parameters of a general dent.

    Attributes:
        l (float): Length along the local x-axis, mm.
        w (float): Width along the local y-axis, mm.
        d (float): Maximum depth, mm.
        b (float): Exponential base, > 1. Smaller values deepen faster inward.
        p (float): Egg-factor in (0, 2); 1 gives an elliptic boundary.
        s_x (float): Shift of the deepest point along x, fraction of `l`.
        s_y (float): Shift of the deepest point along y, fraction of `w`.

    The shift must lie strictly inside the reference boundary, which is
    stricter than the independent ranges for egg-shaped boundaries.

    Example:
        {
            "l": 30.0, "w": 30.0, "d": 5.0,
            "b": 2.718281828, "p": 0.7, "s_x": -0.2, "s_y": -0.1
        }
    """

    model_config = ConfigDict(frozen=True)

    l: float = Field(gt=0, allow_inf_nan=False)
    w: float = Field(gt=0, allow_inf_nan=False)
    d: float = Field(gt=0, allow_inf_nan=False)
    b: float = Field(math.e, gt=1, allow_inf_nan=False)
    p: float = Field(1.0, gt=0, lt=2)
    s_x: float = Field(0.0, gt=-0.5, lt=0.5)
    s_y: float = Field(0.0, gt=-0.5, lt=0.5)

    @model_validator(mode="after")
    def shift_inside_boundary(self):
        half = math.sqrt(max(0.25 - ((self.s_x + 0.5) ** self.p - 0.5) ** 2, 0.0))
        if not -half < self.s_y < half:
            raise ValueError(
                f"shift ({self.s_x}, {self.s_y}) lies outside the reference boundary for p={self.p}"
            )
        return self


class RefPoint(BaseModel):
    """
    A point in the unit reference frame.

    Attributes:
        x (float): Reference abscissa in [-0.5, 0.5].
        y (float): Reference ordinate.
    """

    model_config = ConfigDict(frozen=True)

    x: float = Field(ge=-0.5, le=0.5)
    y: float = Field(allow_inf_nan=False)


def wrap_angle(theta: float) -> float:
    """Reduce an angle into (-pi/2, pi/2]."""
    wrapped = theta - math.pi * math.floor(theta / math.pi)
    if wrapped > math.pi / 2:
        wrapped -= math.pi
    return wrapped


class Pose(BaseModel):
    """
    In-plane placement of a dent in the local plane frame.

    Attributes:
        c_x (float): Center x, mm.
        c_y (float): Center y, mm.
        theta (float): Rotation of the dent x-axis, radians in (-pi/2, pi/2].
    """

    model_config = ConfigDict(frozen=True)

    c_x: float = Field(0.0, allow_inf_nan=False)
    c_y: float = Field(0.0, allow_inf_nan=False)
    theta: float = Field(0.0, allow_inf_nan=False)

    @field_validator("theta")
    @classmethod
    def canonical_theta(cls, value: float) -> float:
        return wrap_angle(value)

    def to_dent_frame(self, x: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Map local plane coordinates into the dent's own axes."""
        cos_t, sin_t = math.cos(self.theta), math.sin(self.theta)
        dx = np.asarray(x, dtype=float) - self.c_x
        dy = np.asarray(y, dtype=float) - self.c_y
        return cos_t * dx + sin_t * dy, -sin_t * dx + cos_t * dy

    def from_dent_frame(self, u: np.ndarray, v: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Map dent-axis coordinates back into the local plane frame."""
        cos_t, sin_t = math.cos(self.theta), math.sin(self.theta)
        u = np.asarray(u, dtype=float)
        v = np.asarray(v, dtype=float)
        return self.c_x + cos_t * u - sin_t * v, self.c_y + sin_t * u + cos_t * v


class HeightField(BaseModel):
    """
    Regular grid of signed heights over the base plane.

    Attributes:
        spacing (float): Grid spacing, mm.
        origin_x (float): x of the cell in column 0, mm.
        origin_y (float): y of the cell in row 0, mm.
        heights (numpy.ma.MaskedArray): rows x cols heights in mm; masked
            cells lie outside the dent support.

    Cell (i, j) sits at (origin_x + j * spacing, origin_y + i * spacing).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    spacing: float = Field(gt=0, allow_inf_nan=False)
    origin_x: float = Field(0.0, allow_inf_nan=False)
    origin_y: float = Field(0.0, allow_inf_nan=False)
    heights: np.ma.MaskedArray

    @field_validator("heights", mode="before")
    @classmethod
    def as_masked_grid(cls, value):
        grid = np.ma.array(value, dtype=float, copy=True)
        grid.mask = np.ma.getmaskarray(grid) | ~np.isfinite(grid.filled(0.0))
        if grid.ndim != 2 or grid.shape[0] == 0 or grid.shape[1] == 0:
            raise ValueError(f"heights must be a non-empty 2D grid, got shape {grid.shape}")
        return grid

    @property
    def rows(self) -> int:
        return self.heights.shape[0]

    @property
    def cols(self) -> int:
        return self.heights.shape[1]

    @property
    def xs(self) -> np.ndarray:
        return self.origin_x + self.spacing * np.arange(self.cols)

    @property
    def ys(self) -> np.ndarray:
        return self.origin_y + self.spacing * np.arange(self.rows)

    @property
    def support(self) -> np.ndarray:
        """Boolean grid, True where a height is defined."""
        return ~np.ma.getmaskarray(self.heights)

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        """x and y of every cell, each shaped like the grid."""
        return np.meshgrid(self.xs, self.ys)


class SrmMeasures(BaseModel):
    """
    Traditional box description of a dent.

    Attributes:
        length (float): Longest chord across the dent, mm.
        width (float): Longest chord perpendicular to the length, mm.
        depth_at_width_section (float): Deepest point along the width chord, mm.
        max_depth (float): Deepest point overall, mm.
        length_angle (float): Direction of the length chord, degrees in [0, 180).
        discrepancy (float): `max_depth - depth_at_width_section`, mm.
    """

    model_config = ConfigDict(frozen=True)

    length: float = Field(ge=0)
    width: float = Field(ge=0)
    depth_at_width_section: float = Field(ge=0)
    max_depth: float = Field(ge=0)
    length_angle: float = 0.0

    @computed_field
    @property
    def discrepancy(self) -> float:
        return self.max_depth - self.depth_at_width_section
