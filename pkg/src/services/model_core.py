"""
Closed-form dent model.

The reference dent lives on the unit box [-0.5, 0.5]^2 with peak depth 1.
Its support is bounded by the egg curve y = +/- f(x); inside, the depth is an
exponential bump whose exponent diverges to -inf at the boundary. A general
dent rescales the reference by (l, w, d).

Scalar functions validate their arguments and return None outside the
support. The `*_array` functions are the vectorized forms used by sampling and
fitting; they return `numpy.ma.MaskedArray` with outside cells masked.
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from framework.errors import DomainError, ResourceLimitError
from models.dent import DentParams, HeightField, RefPoint

logger = logging.getLogger(__name__)

DEFAULT_CELL_CAP = 10_000_000

# Examples of the model: rows 1-8
EXAMPLE_ROWS = {
    "row1": DentParams(l=30, w=30, d=5, b=2, p=1, s_x=0, s_y=0),
    "row2": DentParams(l=30, w=30, d=5, b=10, p=1, s_x=0, s_y=0),
    "row3": DentParams(l=30, w=30, d=5, b=math.e, p=0.8, s_x=0, s_y=0),
    "row4": DentParams(l=30, w=30, d=5, b=math.e, p=1.2, s_x=0, s_y=0),
    "row5": DentParams(l=30, w=15, d=5, b=math.e, p=1, s_x=0, s_y=0),
    "row6": DentParams(l=30, w=15, d=5, b=math.e, p=1, s_x=0.2, s_y=0),
    "row7": DentParams(l=30, w=15, d=5, b=math.e, p=1, s_x=0, s_y=0.2),
    "row8": DentParams(l=30, w=30, d=5, b=math.e, p=0.7, s_x=-0.2, s_y=-0.1),
}

# Fitted shapes of simulated sphere impacts at 45 and 60 degrees
IMPACTS = {
    "impact45": DentParams(l=6.10, w=5.48, d=1.24, b=3.11, p=1.01, s_x=-0.11, s_y=0.0),
    "impact60": DentParams(l=6.66, w=5.21, d=1.12, b=2.37, p=0.96, s_x=-0.12, s_y=0.0),
}

PRESETS = {**EXAMPLE_ROWS, **IMPACTS}


def _check_p(p: float) -> None:
    if not 0.0 < p < 2.0:
        raise DomainError(f"egg-factor p must lie in (0, 2), got {p}")


def _check_shape(b: float, p: float, s_x: float, s_y: float) -> None:
    _check_p(p)
    if not b > 1.0:
        raise DomainError(f"base b must exceed 1, got {b}")
    if not (-0.5 < s_x < 0.5 and -0.5 < s_y < 0.5):
        raise DomainError(f"shift ({s_x}, {s_y}) must lie in (-0.5, 0.5)^2")
    if not abs(s_y) < float(half_width_array(s_x, p)):
        raise DomainError(f"shift ({s_x}, {s_y}) lies outside the boundary for p={p}")


def half_width_array(x, p: float) -> np.ndarray:
    """f(x) = sqrt(0.25 - ((x + 0.5)^p - 0.5)^2), x clipped to the box."""
    t = np.clip(np.asarray(x, dtype=float) + 0.5, 0.0, 1.0)
    g = t ** p - 0.5
    return np.sqrt(np.maximum(0.25 - g * g, 0.0))


def boundary_half_width(x: float, p: float) -> float:
    """
    Half-width of the reference support at abscissa `x`.

    Args:
        x (float): Reference abscissa in [-0.5, 0.5].
        p (float): Egg-factor in (0, 2).

    Returns:
        float: f(x) in [0, 0.5]; 0 at both ends of the box.

    Raises:
        DomainError: If x or p is out of range.
    """
    _check_p(p)
    if not -0.5 <= x <= 0.5:
        raise DomainError(f"reference abscissa must lie in [-0.5, 0.5], got {x}")
    return float(half_width_array(x, p))


def _radial_sq(x, y, p: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    f = half_width_array(x, p)
    # x^2 + f^2 >= min(0.25, f(0)^2) > 0 on the box
    return (x * x + y * y) / (x * x + f * f)


def radial_ratio_array(x, y, p: float) -> np.ndarray:
    """Vectorized r(x, y); r(0, 0) = 0."""
    return np.sqrt(_radial_sq(x, y, p))


def radial_ratio(pt: RefPoint, p: float) -> float:
    """
    Helper ratio r(x, y) = |(x, y)| / |(x, f(x))|.

    Equals 0 at the origin and 1 on the boundary curve.

    Raises:
        DomainError: If p is out of range.
    """
    _check_p(p)
    return float(radial_ratio_array(pt.x, pt.y, p))


def radial_gradient_array(x, y, p: float) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorized analytic (dr/dx, dr/dy); undefined at the origin."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    t = x + 0.5
    g = t ** p - 0.5
    dg = p * t ** (p - 1.0)
    num = x * x + y * y
    den = x * x + 0.25 - g * g
    r = np.sqrt(num / den)
    # d(x^2 + f^2)/dx = 2x - 2 g g'
    drdx = (x * den - num * (x - g * dg)) / (r * den * den)
    drdy = y / (r * den)
    return drdx, drdy


def radial_ratio_gradient(pt: RefPoint, p: float) -> Tuple[float, float]:
    """
    Partial derivatives of r at an interior point.

    Raises:
        DomainError: At the origin, where r is not differentiable, on the box
            edges x = +/-0.5, or for p out of range.
    """
    _check_p(p)
    if pt.x == 0.0 and pt.y == 0.0:
        raise DomainError("radial ratio gradient is undefined at the origin")
    if not -0.5 < pt.x < 0.5:
        raise DomainError(f"gradient needs a strictly interior abscissa, got {pt.x}")
    drdx, drdy = radial_gradient_array(pt.x, pt.y, p)
    return float(drdx), float(drdy)


def ref_dent_array(x, y, b: float, p: float, s_x: float = 0.0, s_y: float = 0.0) -> np.ma.MaskedArray:
    """
    Vectorized reference dent.

    Inside the support returns the depth in [0, 1]; cells outside are masked.
    The exponent is evaluated first and values below the smallest normal
    float are returned as exact zeros.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    inside = (np.abs(x) < 0.5) & (np.abs(y) < half_width_array(x, p))

    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r2 = np.where(inside, _radial_sq(x, y, p), 0.0)
        gap = 1.0 - r2
        inv = np.where(gap > 0.0, 1.0 / gap, np.inf)
        if s_x == 0.0 and s_y == 0.0:
            exponent = 1.0 - inv
        else:
            rs2 = _radial_sq(s_x, s_y, p)
            rs = math.sqrt(float(rs2))
            drdx, drdy = radial_gradient_array(s_x, s_y, p)
            scale = 2.0 * rs / (1.0 - float(rs2)) ** 2
            tilt = (x - s_x) * (scale * float(drdx)) + (y - s_y) * (scale * float(drdy))
            exponent = -inv + tilt + 1.0 / (1.0 - float(rs2))

        log_b = math.log(b)
        floor = math.log(np.finfo(float).tiny) / log_b
        safe = np.where(inside & (exponent >= floor), exponent, 0.0)
        value = np.where(inside & (exponent >= floor), np.exp(safe * log_b), 0.0)

    return np.ma.masked_array(value, mask=~inside)


def ref_dent(pt: RefPoint, b: float = math.e, p: float = 1.0,
             s_x: float = 0.0, s_y: float = 0.0) -> Optional[float]:
    """
    Reference dent depth at `pt`.

    Args:
        pt (RefPoint): Reference location.
        b, p, s_x, s_y: Shape parameters, see `DentParams`.

    Returns:
        float | None: Depth in [0, 1], exactly 1 at (s_x, s_y); None outside
        the support.

    Raises:
        DomainError: If a shape parameter is out of range.
    """
    _check_shape(b, p, s_x, s_y)
    value = ref_dent_array(pt.x, pt.y, b, p, s_x, s_y)
    if np.ma.is_masked(value):
        return None
    return float(value)


def dent_depth_array(x, y, params: DentParams) -> np.ma.MaskedArray:
    """Vectorized general dent depth in mm, masked outside the support."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ref = ref_dent_array(x / params.l, y / params.w, params.b, params.p, params.s_x, params.s_y)
    return ref * params.d


def dent_depth(x: float, y: float, params: DentParams) -> Optional[float]:
    """
    Depth of a general dent at (x, y) mm in the dent's own axes.

    Returns:
        float | None: `d * ref_dent(x / l, y / w)`, or None outside the support.
    """
    value = dent_depth_array(x, y, params)
    if np.ma.is_masked(value):
        return None
    return float(value)


def grid_axis(half_extent: float, spacing: float) -> np.ndarray:
    """Odd number of samples, centered on 0, covering [-half_extent, half_extent]."""
    n = int(math.ceil(2.0 * half_extent / spacing - 1e-9)) + 1
    if n % 2 == 0:
        n += 1
    return (np.arange(n) - (n - 1) / 2) * spacing


def sample_height_field(params: DentParams, spacing: float, margin: float = 0.0,
                        cell_cap: int = DEFAULT_CELL_CAP) -> HeightField:
    """
    Sample a dent on a regular grid.

    The grid is centered on the dent origin and covers
    [-l/2 - margin, l/2 + margin] x [-w/2 - margin, w/2 + margin]. Heights are
    negative depths; cells outside the support are masked.

    Args:
        params (DentParams): Dent to sample.
        spacing (float): Grid spacing, mm.
        margin (float): Extra border around the dent box, mm.
        cell_cap (int): Largest allowed rows * cols.

    Raises:
        DomainError: If spacing <= 0 or margin < 0.
        ResourceLimitError: If the grid would exceed `cell_cap`.
    """
    if not spacing > 0:
        raise DomainError(f"spacing must be positive, got {spacing}")
    if not margin >= 0:
        raise DomainError(f"margin must be non-negative, got {margin}")

    xs = grid_axis(params.l / 2 + margin, spacing)
    ys = grid_axis(params.w / 2 + margin, spacing)
    cells = len(xs) * len(ys)
    if cells > cell_cap:
        raise ResourceLimitError(f"grid of {len(ys)} x {len(xs)} cells exceeds the cap of {cell_cap}")

    X, Y = np.meshgrid(xs, ys)
    heights = -dent_depth_array(X, Y, params)
    logger.debug(f"Sampled {len(ys)} x {len(xs)} height field at {spacing} mm")
    return HeightField(spacing=spacing, origin_x=float(xs[0]), origin_y=float(ys[0]), heights=heights)


def max_depth_point(params: DentParams) -> Tuple[float, float, float]:
    """Location (mm) and value of the deepest point: (s_x * l, s_y * w, d)."""
    return (params.s_x * params.l, params.s_y * params.w, params.d)
