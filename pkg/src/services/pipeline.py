"""
End-to-end inspection workflow: plane removal, segmentation and fitting.
"""

import logging
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from framework.errors import DomainError
from models.cloud import DentSegment, PlaneFrame, PointCloud
from models.fit import FitConfig, FitReport
from models.report import CompareReport
from services.fitting import compare_modes, fit
from services.model_core import DEFAULT_CELL_CAP
from services.plane import fit_plane_lsq, fit_plane_ransac, to_local_frame
from services.segmentation import anchor_ring, segment_dents

logger = logging.getLogger(__name__)

RANSAC_ITERATIONS = 500
PLANE_METHODS = ("ransac", "lsq")


class Extraction(NamedTuple):
    frame: PlaneFrame
    local: np.ndarray
    segments: List[DentSegment]


def extract_segments(cloud: PointCloud, depth_threshold: float, cell: float, min_points: int,
                     seed: int = 0, iterations: int = RANSAC_ITERATIONS, plane: str = "ransac",
                     inlier_tol: Optional[float] = None, cell_cap: int = DEFAULT_CELL_CAP) -> Extraction:
    """
    Remove the base plane and cut the cloud into dent segments.

    Args:
        plane (str): "ransac" (robust, the default) or "lsq", a least-squares
            fit of every point that dents pull down.
        inlier_tol (float, optional): RANSAC inlier distance, mm. Defaults to
            the depth threshold.
        cell_cap (int): Largest segmentation grid, in cells.

    Raises:
        DomainError: On an unknown plane method.
    """
    if plane == "ransac":
        tol = depth_threshold if inlier_tol is None else inlier_tol
        frame = fit_plane_ransac(cloud, inlier_tol=tol, iterations=iterations, seed=seed)
    elif plane == "lsq":
        frame = fit_plane_lsq(cloud)
    else:
        raise DomainError(f"plane must be one of {PLANE_METHODS}, got {plane!r}")
    local = to_local_frame(cloud, frame)
    segments = segment_dents(local, depth_threshold=depth_threshold, cell=cell, min_points=min_points,
                             cell_cap=cell_cap)
    return Extraction(frame, local, segments)


def anchored(extraction: Extraction, config: FitConfig, depth_threshold: float) -> List[DentSegment]:
    """Every segment with its anchor ring appended."""
    return [
        anchor_ring(segment, extraction.local, config.ring_width, depth_threshold)
        for segment in extraction.segments
    ]


def fit_segments(extraction: Extraction, config: FitConfig,
                 depth_threshold: float) -> List[Tuple[DentSegment, FitReport]]:
    """Fit each anchored segment in order; returns (segment, report) pairs."""
    results = []
    for k, segment in enumerate(anchored(extraction, config, depth_threshold)):
        logger.info(f"Segment {k}: {segment.count} points")
        results.append((segment, fit(segment, config)))
    return results


def compare_segments(extraction: Extraction, config: FitConfig,
                     depth_threshold: float) -> List[Tuple[DentSegment, CompareReport]]:
    """Fit both modes on each anchored segment."""
    return [
        (segment, compare_modes(segment, config))
        for segment in anchored(extraction, config, depth_threshold)
    ]
