"""
Structural Repair Manual box measures.

The SRM describes a dent by its length (longest end-to-end distance), its
width (longest distance at 90 degrees to the length) and the depth taken
where the width is measured. These are computed on the support of a height
field so that fitted models and scans can be compared with the box model.
"""

import logging
import math

import numpy as np

from framework.errors import EmptyFieldError
from models.dent import HeightField, SrmMeasures

logger = logging.getLogger(__name__)

ANGLE_STEP_DEG = 0.5
# extents closer than this are ties, resolved by the smaller angle
TIE_TOL = 1e-9


def srm_box_measures(field: HeightField) -> SrmMeasures:
    """
    Box measures of the support of a height field.

    Length is the largest extent of the support cells over directions sampled
    every 0.5 degrees (ties go to the smaller angle). Width is the longest
    chord perpendicular to the length: cells are grouped into one-cell-wide
    strips across the length direction and the longest strip wins, ties going
    to the strip nearest the middle of the length. Extents
    include one cell, so a single cell measures `spacing` both ways.

    Args:
        field (HeightField): Field whose unmasked cells form the dent support.

    Returns:
        SrmMeasures: length, width, depth along the width chord and overall
        maximum depth, all in mm.

    Raises:
        EmptyFieldError: If every cell is masked.
    """
    support = field.support
    if not support.any():
        raise EmptyFieldError("height field has no cells inside the dent support")

    X, Y = field.cell_centers()
    xs = X[support]
    ys = Y[support]
    depth = np.abs(np.asarray(field.heights.filled(0.0))[support])

    angles = np.deg2rad(np.arange(0.0, 180.0, ANGLE_STEP_DEG))
    best_angle, best_extent = 0.0, -1.0
    for angle in angles:
        proj = xs * math.cos(angle) + ys * math.sin(angle)
        extent = float(proj.max() - proj.min())
        if extent > best_extent + TIE_TOL:
            best_angle, best_extent = float(angle), extent
    length = best_extent + field.spacing

    along = xs * math.cos(best_angle) + ys * math.sin(best_angle)
    across = -xs * math.sin(best_angle) + ys * math.cos(best_angle)
    strip = np.floor((along - along.min()) / field.spacing + 0.5).astype(np.int64)

    # equal chords go to the strip nearest the middle of the length
    middle = 0.5 * (strip.max() + strip.min())
    best_key, width, width_depth = None, 0.0, 0.0
    for index in np.unique(strip):
        members = strip == index
        chord = float(across[members].max() - across[members].min()) + field.spacing
        key = (-round(chord / TIE_TOL), abs(index - middle), index)
        if best_key is None or key < best_key:
            best_key, width = key, chord
            width_depth = float(depth[members].max())

    measures = SrmMeasures(
        length=length,
        width=width,
        depth_at_width_section=width_depth,
        max_depth=float(depth.max()),
        length_angle=math.degrees(best_angle),
    )
    logger.debug(f"SRM measures: {measures.model_dump()}")
    return measures
