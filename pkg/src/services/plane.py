"""
Base-plane estimation and projection into the local plane frame.

Frame conventions:
- The normal is the smallest-variance principal direction, oriented so that
  the most extreme 1% of heights are negative (dents point down).
- u is the largest-variance in-plane direction, signed so that the first
  point of the cloud has x >= 0; v = normal x u.
"""

import logging
import math

import numpy as np

from framework.errors import DegenerateGeometryError, DomainError, RobustFitFailedError
from models.cloud import PlaneFrame, PointCloud

logger = logging.getLogger(__name__)

RANK_TOL = 1e-12
EXTREME_FRACTION = 0.01
MIN_INLIER_FRACTION = 0.5


def _orient(origin: np.ndarray, normal: np.ndarray, u: np.ndarray, points: np.ndarray) -> PlaneFrame:
    offsets = points - origin
    heights = offsets @ normal
    k = max(1, int(math.ceil(EXTREME_FRACTION * len(points))))
    extreme = np.argsort(np.abs(heights), kind="stable")[-k:]
    if heights[extreme].sum() > 0.0:
        normal = -normal

    u = u - np.dot(u, normal) * normal
    u = u / np.linalg.norm(u)
    if np.dot(offsets[0], u) < 0.0:
        u = -u
    v = np.cross(normal, u)
    return PlaneFrame(origin=origin, normal=normal, u=u, v=v / np.linalg.norm(v))


def _principal_axes(points: np.ndarray):
    origin = points.mean(axis=0)
    centered = points - origin
    covariance = centered.T @ centered / len(points)
    eigvals, eigvecs = np.linalg.eigh(covariance)
    if eigvals[2] <= 0.0 or eigvals[1] <= RANK_TOL * eigvals[2]:
        raise DegenerateGeometryError("points are coincident or collinear; no plane is defined")
    return origin, eigvecs[:, 0], eigvecs[:, 2]


def fit_plane_lsq(cloud: PointCloud) -> PlaneFrame:
    """
    Total-least-squares plane through a cloud.

    The origin is the centroid and the normal the eigenvector of the point
    covariance with the smallest eigenvalue.

    Raises:
        DegenerateGeometryError: If the covariance has rank below 2.
    """
    if len(cloud) < 3:
        raise DegenerateGeometryError(f"a plane needs 3 points, got {len(cloud)}")
    origin, normal, u = _principal_axes(cloud.points)
    frame = _orient(origin, normal, u, cloud.points)
    logger.info(f"Least-squares plane: normal={np.round(frame.normal, 6).tolist()}")
    return frame


def fit_plane_ransac(cloud: PointCloud, inlier_tol: float, iterations: int = 500, seed: int = 0) -> PlaneFrame:
    """
    Robust plane fit.

    Planes through random point triples are scored by the number of points
    within `inlier_tol`; the best one (first on ties) is refined by a
    least-squares fit of its inliers. Orientation uses the whole cloud.

    Args:
        cloud (PointCloud): Input points.
        inlier_tol (float): Inlier distance, mm.
        iterations (int): Number of sampled triples.
        seed (int): Seed of the triple sampler.

    Raises:
        DomainError: If inlier_tol <= 0 or iterations < 1.
        RobustFitFailedError: If no plane gathers half of the points.
    """
    if not inlier_tol > 0:
        raise DomainError(f"inlier_tol must be positive, got {inlier_tol}")
    if iterations < 1:
        raise DomainError(f"iterations must be at least 1, got {iterations}")

    points = cloud.points
    n = len(points)
    if n < 3:
        raise DegenerateGeometryError(f"a plane needs 3 points, got {n}")

    rng = np.random.default_rng(seed)
    best_count, best_inliers = 0, None
    for _ in range(iterations):
        sample = points[rng.choice(n, size=3, replace=False)]
        normal = np.cross(sample[1] - sample[0], sample[2] - sample[0])
        norm = np.linalg.norm(normal)
        if norm == 0.0:
            continue
        normal /= norm
        inliers = np.abs((points - sample[0]) @ normal) <= inlier_tol
        count = int(inliers.sum())
        if count > best_count:
            best_count, best_inliers = count, inliers

    if best_inliers is None or best_count < MIN_INLIER_FRACTION * n:
        raise RobustFitFailedError(
            f"best plane has {best_count} of {n} inliers; at least {MIN_INLIER_FRACTION:.0%} required"
        )

    origin, normal, u = _principal_axes(points[best_inliers])
    frame = _orient(origin, normal, u, points)
    logger.info(f"RANSAC plane: {best_count}/{n} inliers, normal={np.round(frame.normal, 6).tolist()}")
    return frame


def to_local_frame(cloud: PointCloud, frame: PlaneFrame) -> np.ndarray:
    """
    Express points in the plane frame.

    Returns:
        numpy.ndarray: (N, 3) rows of (x, y, h) with x = (P - origin) . u,
        y = (P - origin) . v and h = (P - origin) . normal.
    """
    return (cloud.points - frame.origin) @ frame.rotation.T
