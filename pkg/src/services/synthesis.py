"""
Synthetic dent clouds.

A flat square-grid patch with one or more model dents pressed into it. The
patch can be tilted, the heights perturbed by Gaussian noise and the primary
dent skewed along its length, which gives asymmetric shapes the model cannot
represent exactly.
"""

import logging
import math
from typing import List, Optional, Tuple

import numpy as np

from framework.errors import DomainError, ResourceLimitError
from models.cloud import PointCloud
from models.dent import DentParams, Pose
from services.model_core import DEFAULT_CELL_CAP, PRESETS, dent_depth_array

logger = logging.getLogger(__name__)

# skew must keep 1 + skew * x_ref positive on [-0.5, 0.5]
MAX_SKEW = 2.0


def preset(name: str) -> DentParams:
    """
    Look up a named parameter set (`row1` ... `row8`, `impact45`, `impact60`).

    Raises:
        DomainError: For an unknown name.
    """
    try:
        return PRESETS[name]
    except KeyError:
        raise DomainError(f"unknown preset '{name}', expected one of {', '.join(sorted(PRESETS))}")


def _box_bounds(params: DentParams, pose: Pose) -> Tuple[float, float, float, float]:
    u = np.array([-0.5, 0.5, 0.5, -0.5]) * params.l
    v = np.array([-0.5, -0.5, 0.5, 0.5]) * params.w
    x, y = pose.from_dent_frame(u, v)
    return float(x.min()), float(y.min()), float(x.max()), float(y.max())


def _depth(x: np.ndarray, y: np.ndarray, params: DentParams, pose: Pose, skew: float = 0.0) -> np.ndarray:
    u, v = pose.to_dent_frame(x, y)
    depth = dent_depth_array(u, v, params).filled(0.0)
    if skew:
        depth = depth * (1.0 + skew * u / params.l)
    return depth


def synthesize_cloud(
    params: DentParams,
    pose: Pose = Pose(),
    spacing: float = 0.5,
    margin: Optional[float] = None,
    noise: float = 0.0,
    seed: int = 0,
    tilt: float = 0.0,
    skew: float = 0.0,
    secondary: Optional[List[Tuple[DentParams, Pose]]] = None,
    cell_cap: int = DEFAULT_CELL_CAP,
) -> PointCloud:
    """
    Sample a flat patch containing model dents.

    The grid is aligned so that one sample falls exactly on the primary dent
    center, and covers the bounding boxes of all dents plus `margin`.

    Args:
        params (DentParams): Primary dent.
        pose (Pose): Placement of the primary dent on the patch.
        spacing (float): Sample spacing, mm.
        margin (float, optional): Flat border around the dents, mm. Defaults
            to half the larger of l and w.
        noise (float): Standard deviation of Gaussian height noise, mm.
        seed (int): Seed of the noise generator.
        tilt (float): Rotation of the whole patch about the x-axis, degrees.
        skew (float): Depth of the primary dent is multiplied by
            `1 + skew * u / l`, u along the dent length. |skew| < 2.
        secondary (list, optional): Further (params, pose) dents. Overlapping
            depths add up.
        cell_cap (int): Largest allowed number of samples.

    Returns:
        PointCloud: Points (x, y, z) in mm; z is negative inside dents.

    Raises:
        DomainError: On a non-positive spacing, negative margin or noise, or
            an out-of-range skew.
        ResourceLimitError: If the patch exceeds `cell_cap` samples.
    """
    if not spacing > 0:
        raise DomainError(f"spacing must be positive, got {spacing}")
    if not noise >= 0:
        raise DomainError(f"noise must be non-negative, got {noise}")
    if not abs(skew) < MAX_SKEW:
        raise DomainError(f"skew must lie in (-{MAX_SKEW}, {MAX_SKEW}), got {skew}")
    if margin is None:
        margin = 0.5 * max(params.l, params.w)
    if not margin >= 0:
        raise DomainError(f"margin must be non-negative, got {margin}")

    dents = [(params, pose)] + list(secondary or [])
    bounds = np.array([_box_bounds(p, q) for p, q in dents])
    lo_x, lo_y = bounds[:, 0].min() - margin, bounds[:, 1].min() - margin
    hi_x, hi_y = bounds[:, 2].max() + margin, bounds[:, 3].max() + margin

    i0, i1 = math.floor((lo_x - pose.c_x) / spacing), math.ceil((hi_x - pose.c_x) / spacing)
    j0, j1 = math.floor((lo_y - pose.c_y) / spacing), math.ceil((hi_y - pose.c_y) / spacing)
    xs = pose.c_x + spacing * np.arange(i0, i1 + 1)
    ys = pose.c_y + spacing * np.arange(j0, j1 + 1)
    if len(xs) * len(ys) > cell_cap:
        raise ResourceLimitError(f"patch of {len(ys)} x {len(xs)} samples exceeds the cap of {cell_cap}")

    X, Y = np.meshgrid(xs, ys)
    x, y = X.ravel(), Y.ravel()
    z = -_depth(x, y, params, pose, skew)
    for extra_params, extra_pose in dents[1:]:
        z -= _depth(x, y, extra_params, extra_pose)

    if noise > 0:
        z = z + np.random.default_rng(seed).normal(0.0, noise, size=z.shape)

    if tilt:
        angle = math.radians(tilt)
        y, z = y * math.cos(angle) - z * math.sin(angle), y * math.sin(angle) + z * math.cos(angle)

    logger.info(f"Synthesized {len(x)} points with {len(dents)} dent(s), noise={noise} mm, seed={seed}")
    return PointCloud(points=np.column_stack([x, y, z]))
