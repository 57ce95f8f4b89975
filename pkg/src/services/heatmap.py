"""
Residual and depth heatmaps.

Scattered values are binned onto a regular grid and rendered as a binary
PPM (P6) image with a linear color ramp. Image row 0 is the largest y, so the
picture reads like a plan view of the local plane.
"""

import logging
from pathlib import Path
from typing import Literal, Union

import numpy as np
from PIL import Image

from framework.errors import DomainError, EmptyFieldError, ResourceLimitError
from framework.files import atomic_write
from models.cloud import DentSegment
from models.dent import DentParams, HeightField, Pose
from models.report import HeatmapSpec
from services.fitting import model_heights
from services.model_core import DEFAULT_CELL_CAP

logger = logging.getLogger(__name__)

Reducer = Literal["mean", "min"]


def rasterize_points(xy: np.ndarray, values: np.ndarray, pitch: float, reducer: Reducer = "mean",
                     cell_cap: int = DEFAULT_CELL_CAP) -> HeightField:
    """
    Bin scattered values onto a grid.

    Args:
        xy (numpy.ndarray): (N, 2) point locations, mm.
        values (numpy.ndarray): One value per point.
        pitch (float): Cell size, mm.
        reducer (str): `"mean"` averages the values of a cell, `"min"` keeps
            the smallest.
        cell_cap (int): Largest allowed rows * cols.

    Returns:
        HeightField: Cell (0, 0) is centered on the smallest x and y; cells
        without points are masked.

    Raises:
        DomainError: If pitch <= 0 or the reducer is unknown.
        EmptyFieldError: If no point is given.
    """
    if not pitch > 0:
        raise DomainError(f"pitch must be positive, got {pitch}")
    if reducer not in ("mean", "min"):
        raise DomainError(f"unknown reducer '{reducer}'")
    xy = np.asarray(xy, dtype=float).reshape(-1, 2)
    values = np.asarray(values, dtype=float).reshape(-1)
    if len(xy) == 0:
        raise EmptyFieldError("no points to rasterize")

    origin = xy.min(axis=0)
    cols_idx = np.floor((xy[:, 0] - origin[0]) / pitch + 0.5).astype(np.int64)
    rows_idx = np.floor((xy[:, 1] - origin[1]) / pitch + 0.5).astype(np.int64)
    rows, cols = int(rows_idx.max()) + 1, int(cols_idx.max()) + 1
    if rows * cols > cell_cap:
        raise ResourceLimitError(f"raster of {rows} x {cols} cells exceeds the cap of {cell_cap}")

    flat = rows_idx * cols + cols_idx
    counts = np.bincount(flat, minlength=rows * cols)
    if reducer == "mean":
        sums = np.bincount(flat, weights=values, minlength=rows * cols)
        grid = np.divide(sums, counts, out=np.zeros(rows * cols), where=counts > 0)
    else:
        grid = np.full(rows * cols, np.inf)
        np.minimum.at(grid, flat, values)

    heights = np.ma.masked_array(grid.reshape(rows, cols), mask=(counts == 0).reshape(rows, cols))
    return HeightField(spacing=pitch, origin_x=float(origin[0]), origin_y=float(origin[1]), heights=heights)


def residual_field(segment: DentSegment, params: DentParams, pose: Pose, pitch: float) -> HeightField:
    """Mean absolute residual of a fit per cell."""
    residual = np.abs(segment.h - model_heights(segment.x, segment.y, params, pose))
    return rasterize_points(segment.points[:, :2], residual, pitch, reducer="mean")


def colorize(field: HeightField, spec: HeatmapSpec) -> np.ndarray:
    """
    Map |values| to RGB with the ramp of `spec`.

    Returns:
        numpy.ndarray: (rows, cols, 3) uint8 image, row 0 at the largest y.
    """
    magnitude = np.abs(np.asarray(field.heights.filled(0.0)))
    t = np.clip(magnitude / spec.scale, 0.0, 1.0)[..., np.newaxis]
    low = np.asarray(spec.low, dtype=float)
    high = np.asarray(spec.high, dtype=float)
    rgb = np.rint(low + t * (high - low)).astype(np.uint8)
    rgb[~field.support] = spec.sentinel
    return np.flipud(rgb)


def render_heatmap(field: HeightField, spec: HeatmapSpec, path: Union[str, Path]) -> Path:
    """
    Write a field as a binary PPM image, one pixel per cell.

    Blue is 0 mm and red is `spec.scale` mm or more; masked cells are drawn in
    the sentinel color. The file is written atomically.

    Raises:
        EmptyFieldError: If the field has no unmasked cell.
        OSError: If the destination cannot be written.
    """
    if not field.support.any():
        raise EmptyFieldError("height field has no data to render")
    image = Image.fromarray(np.ascontiguousarray(colorize(field, spec)))
    with atomic_write(path, "wb") as handle:
        image.save(handle, format="PPM")
    logger.info(f"Wrote {field.cols} x {field.rows} heatmap to {path}")
    return Path(path)
