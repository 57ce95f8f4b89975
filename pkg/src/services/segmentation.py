"""
Dent segmentation on the local plane frame.

Points deeper than the threshold are binned into square cells. The occupied
cells are dilated by one cell before labeling, so a dent split by a single
empty cell stays whole, and each 8-connected component of the dilated grid
gathers every point whose cell it covers. The dilated rim keeps the shallow
flanks that the threshold alone would clip.

The grid spans the deep points plus one cell of margin; flat points beyond it
belong to no segment.
"""

import logging
from typing import List, Tuple

import numpy as np
from scipy.ndimage import binary_dilation, label
from scipy.spatial import cKDTree

from framework.errors import DomainError, ResourceLimitError
from models.cloud import DentSegment
from services.model_core import DEFAULT_CELL_CAP

logger = logging.getLogger(__name__)

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)
HALF_DEPTH = 0.5


def _cell_index(values: np.ndarray, start: float, cell: float) -> np.ndarray:
    return np.floor((values - start) / cell).astype(np.int64) + 1


def _check_grid(shape: Tuple[int, int], cell_cap: int) -> None:
    if int(shape[0]) * int(shape[1]) > cell_cap:
        raise ResourceLimitError(
            f"segmentation grid of {shape[0]} x {shape[1]} cells exceeds the cap of {cell_cap}"
        )


def flag_multimodal(points: np.ndarray, cell: float, cell_cap: int = DEFAULT_CELL_CAP) -> bool:
    """
    True if the cells deeper than half the maximum depth form more than one
    8-connected region, the signature of overlapping dents.
    """
    h = points[:, 2]
    deepest = -float(h.min()) if len(h) else 0.0
    if deepest <= 0.0:
        return False
    deep = points[h <= -HALF_DEPTH * deepest]
    ix = _cell_index(deep[:, 0], deep[:, 0].min(), cell)
    iy = _cell_index(deep[:, 1], deep[:, 1].min(), cell)
    shape = (iy.max() + 2, ix.max() + 2)
    _check_grid(shape, cell_cap)
    grid = np.zeros(shape, dtype=bool)
    grid[iy, ix] = True
    _, regions = label(grid, structure=EIGHT_CONNECTED)
    return regions > 1


def segment_dents(local: np.ndarray, depth_threshold: float = 0.05, cell: float = 2.0,
                  min_points: int = 50, cell_cap: int = DEFAULT_CELL_CAP) -> List[DentSegment]:
    """
    Isolate individual dents.

    Args:
        local (numpy.ndarray): (N, 3) points (x, y, h) in the plane frame.
        depth_threshold (float): Points with h <= -depth_threshold seed dents, mm.
        cell (float): Grid cell, mm.
        min_points (int): Segments with fewer points are dropped.
        cell_cap (int): Largest grid allowed, in cells.

    Returns:
        list[DentSegment]: Ordered by descending point count, then by bounding
        box min-x, then min-y. Empty if no point is deep enough.

    Raises:
        DomainError: If depth_threshold or cell is not positive.
        ResourceLimitError: If the deep points span more cells than cell_cap.
    """
    if not depth_threshold > 0:
        raise DomainError(f"depth_threshold must be positive, got {depth_threshold}")
    if not cell > 0:
        raise DomainError(f"cell must be positive, got {cell}")

    local = np.asarray(local, dtype=float)
    if len(local) == 0:
        return []
    deep = local[:, 2] <= -depth_threshold
    if not deep.any():
        logger.info("No points below the depth threshold")
        return []

    # first and last rows and columns are spare, so dilation never wraps
    ix = _cell_index(local[:, 0], local[deep, 0].min(), cell)
    iy = _cell_index(local[:, 1], local[deep, 1].min(), cell)
    shape = (int(iy[deep].max()) + 2, int(ix[deep].max()) + 2)
    _check_grid(shape, cell_cap)

    occupied = np.zeros(shape, dtype=bool)
    occupied[iy[deep], ix[deep]] = True
    footprint = binary_dilation(occupied, structure=EIGHT_CONNECTED)
    labels, count = label(footprint, structure=EIGHT_CONNECTED)

    on_grid = (ix >= 0) & (ix < shape[1]) & (iy >= 0) & (iy < shape[0])
    point_owner = np.zeros(len(local), dtype=np.int64)
    point_owner[on_grid] = labels[iy[on_grid], ix[on_grid]]
    segments = []
    for component in range(1, count + 1):
        indices = np.flatnonzero(point_owner == component)
        if len(indices) < min_points:
            continue
        points = local[indices]
        segments.append(DentSegment(
            points=points,
            indices=indices,
            cell=cell,
            multimodal=flag_multimodal(points, cell, cell_cap),
        ))

    segments.sort(key=lambda s: (-s.count, s.bbox[0], s.bbox[1]))
    for segment in segments:
        if segment.multimodal:
            logger.warning(f"Segment with {segment.count} points looks like overlapping dents")
    logger.info(f"Segmented {len(segments)} dent(s) from {count} deep region(s)")
    return segments


def anchor_ring(segment: DentSegment, local: np.ndarray, width: float,
                depth_threshold: float = 0.05) -> DentSegment:
    """
    Append flat surrounding points to a segment.

    Points of `local` within `width` of any segment point, not already in the
    segment and with |h| <= depth_threshold are added, so the fit is penalized
    for growing the dent past its true boundary.

    Args:
        segment (DentSegment): Segment cut from `local`.
        local (numpy.ndarray): (N, 3) local points the segment came from.
        width (float): Ring width, mm. Zero returns the segment unchanged.
        depth_threshold (float): Largest |h| accepted for ring points, mm.

    Raises:
        DomainError: If width is negative.
    """
    if width < 0:
        raise DomainError(f"ring width must be non-negative, got {width}")
    local = np.asarray(local, dtype=float)
    if width == 0 or segment.count == 0 or len(local) == 0:
        return segment

    candidates = np.abs(local[:, 2]) <= depth_threshold
    if segment.indices is not None:
        candidates[segment.indices] = False
    candidate_idx = np.flatnonzero(candidates)
    if len(candidate_idx) == 0:
        return segment

    tree = cKDTree(segment.points[:, :2])
    distance, _ = tree.query(local[candidate_idx, :2], k=1, distance_upper_bound=width)
    ring = candidate_idx[np.isfinite(distance)]
    if segment.indices is None:
        # hand-built segments carry no indices; skip exact duplicates instead
        duplicate = distance[np.isfinite(distance)] == 0.0
        ring = ring[~duplicate]
    logger.debug(f"Anchor ring adds {len(ring)} points")

    indices = None
    if segment.indices is not None:
        indices = np.concatenate([segment.indices, ring])
    return segment.model_copy(update={
        "points": np.vstack([segment.points, local[ring]]),
        "indices": indices,
    })
