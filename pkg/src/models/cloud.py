"""
Point Cloud Schemas

This module defines:
- `PointCloud`, unordered scanner points in millimeters.
- `PlaneFrame`, an orthonormal frame attached to the base plane.
- `DentSegment`, the points of one isolated dent in the local plane frame.
"""

from typing import Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

ORTHO_TOL = 1e-9


def _as_points(value, columns: int = 3) -> np.ndarray:
    points = np.array(value, dtype=float, copy=True)
    if points.ndim != 2 or points.shape[1] != columns:
        raise ValueError(f"expected an (N, {columns}) array, got shape {points.shape}")
    if not np.all(np.isfinite(points)):
        raise ValueError("all coordinates must be finite")
    return points


class PointCloud(BaseModel):
    """
    Unordered 3D points in the scanner frame.

    Attributes:
        points (numpy.ndarray): (N, 3) coordinates in mm.
        intensity (numpy.ndarray | None): Optional per-point intensity, ignored
            by the pipeline.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    points: np.ndarray
    intensity: Optional[np.ndarray] = None

    @field_validator("points", mode="before")
    @classmethod
    def check_points(cls, value):
        return _as_points(value)

    @model_validator(mode="after")
    def check_intensity(self):
        if self.intensity is not None and len(self.intensity) != len(self.points):
            raise ValueError("intensity must have one value per point")
        return self

    def __len__(self) -> int:
        return len(self.points)


class PlaneFrame(BaseModel):
    """
    Orthonormal frame on the base plane.

    Attributes:
        origin (numpy.ndarray): Point on the plane, mm.
        normal (numpy.ndarray): Unit normal; dents point against it.
        u (numpy.ndarray): In-plane unit x-axis.
        v (numpy.ndarray): In-plane unit y-axis, `normal x u`.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    origin: np.ndarray
    normal: np.ndarray
    u: np.ndarray
    v: np.ndarray

    @field_validator("origin", "normal", "u", "v", mode="before")
    @classmethod
    def as_vector(cls, value):
        vector = np.array(value, dtype=float, copy=True).reshape(-1)
        if vector.shape != (3,) or not np.all(np.isfinite(vector)):
            raise ValueError("expected a finite 3-vector")
        return vector

    @model_validator(mode="after")
    def orthonormal(self):
        for name in ("normal", "u", "v"):
            if abs(np.linalg.norm(getattr(self, name)) - 1.0) > ORTHO_TOL:
                raise ValueError(f"{name} must be a unit vector")
        pairs = ((self.u, self.v), (self.u, self.normal), (self.v, self.normal))
        if any(abs(float(np.dot(a, b))) > ORTHO_TOL for a, b in pairs):
            raise ValueError("frame axes must be mutually orthogonal")
        return self

    @property
    def rotation(self) -> np.ndarray:
        """Rows u, v, normal: maps scanner offsets into local coordinates."""
        return np.vstack([self.u, self.v, self.normal])


class DentSegment(BaseModel):
    """
    Points of one isolated dent in the local plane frame.

    Attributes:
        points (numpy.ndarray): (n, 3) rows of (x, y, h); x, y in-plane mm,
            h signed height mm (negative below the plane).
        indices (numpy.ndarray | None): Row of each point in the local cloud it
            was cut from; None for hand-built segments.
        cell (float): Grid cell used to cut the segment, mm.
        multimodal (bool): More than one deep region was found inside the
            segment (likely overlapping dents).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    points: np.ndarray
    indices: Optional[np.ndarray] = None
    cell: float = Field(1.0, gt=0)
    multimodal: bool = False

    @field_validator("points", mode="before")
    @classmethod
    def check_points(cls, value):
        return _as_points(value)

    @field_validator("indices", mode="before")
    @classmethod
    def check_indices(cls, value):
        if value is None:
            return None
        return np.array(value, dtype=np.int64, copy=True).reshape(-1)

    @model_validator(mode="after")
    def indices_match(self):
        if self.indices is not None and len(self.indices) != len(self.points):
            raise ValueError("indices must have one entry per point")
        return self

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def h(self) -> np.ndarray:
        return self.points[:, 2]

    @property
    def bbox(self) -> Tuple[float, float, float, float]:
        """(min_x, min_y, max_x, max_y) of the points, mm."""
        if self.count == 0:
            return (0.0, 0.0, 0.0, 0.0)
        lo = self.points[:, :2].min(axis=0)
        hi = self.points[:, :2].max(axis=0)
        return (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))
