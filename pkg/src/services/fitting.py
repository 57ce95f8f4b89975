"""
Fitting the dent model to a segment.

The unknowns are the pose (c_x, c_y, theta) and the seven shape parameters.
Bounds are enforced by reparameterization, so the optimizer works on an
unconstrained vector:

    l, w, d   -> log
    b         -> log(b - 1)
    p         -> logit(p / 2)                 p in (0, 2)
    s_x, s_y  -> 2 * atanh(s / 0.45)          s in (-0.45, 0.45)
    theta     -> free, reduced into (-pi/2, pi/2] before every evaluation

Residuals are `h - model`, with the model taken as 0 outside its support.
Minimization is a derivative-free Nelder-Mead simplex (scipy) restarted from
several perturbed initial guesses; the best objective wins, ties going to
fewer evaluations and then to the lower start index.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError
from scipy.optimize import minimize

from framework.errors import DegenerateSegmentError, EmptyFieldError
from models.cloud import DentSegment
from models.dent import DentParams, Pose, SrmMeasures, wrap_angle
from models.fit import FULL7, SIMPLIFIED3, WEAK_BASE, FitConfig, FitReport, ResidualStats
from models.report import CompareReport
from services.model_core import half_width_array, ref_dent_array, sample_height_field
from services.srm import srm_box_measures

logger = logging.getLogger(__name__)

SHIFT_BOUND = 0.45
GUESS_SHIFT_CLAMP = 0.3
PERTURB_SCALE = 0.15
PERTURB_THETA = math.radians(15.0)
START_P = (1.0, 0.8, 1.2)
START_B = (math.e, 2.0, 6.0)
# samples along the longer axis of the fitted-model grid used for SRM measures
SRM_SAMPLES = 200

Shape = Tuple[float, float, float, float, float, float, float]


def model_heights(x: np.ndarray, y: np.ndarray, params: DentParams, pose: Pose) -> np.ndarray:
    """Signed model heights at local points, 0 outside the support."""
    u, v = pose.to_dent_frame(x, y)
    ref = ref_dent_array(u / params.l, v / params.w, params.b, params.p, params.s_x, params.s_y)
    return -params.d * ref.filled(0.0)


def objective(segment: DentSegment, params: DentParams, pose: Pose) -> float:
    """Sum of squared residuals `h - model`, mm^2."""
    residual = segment.h - model_heights(segment.x, segment.y, params, pose)
    return float(np.dot(residual, residual))


def residual_stats(segment: DentSegment, params: DentParams, pose: Pose) -> ResidualStats:
    """
    MAE, RMSE and maximum absolute residual of a parameter set.

    Raises:
        EmptyFieldError: If the segment has no points.
    """
    if segment.count == 0:
        raise EmptyFieldError("cannot compute residuals of an empty segment")
    residual = segment.h - model_heights(segment.x, segment.y, params, pose)
    return ResidualStats.from_residuals(residual)


def initial_guess(segment: DentSegment) -> Tuple[DentParams, Pose]:
    """
    Moment-based starting point.

    The center is the depth-weighted centroid, theta the major principal axis
    of the depth-weighted second moments, l and w the extents of the segment
    along and across theta, d the deepest point. The shift comes from the
    deepest point's location, clamped to [-0.3, 0.3]; b = e and p = 1.

    Raises:
        DegenerateSegmentError: If no point lies below the plane.
    """
    if segment.count == 0:
        raise DegenerateSegmentError("segment is empty")
    x, y, h = segment.x, segment.y, segment.h
    weights = np.clip(-h, 0.0, None)
    total = float(weights.sum())
    if total <= 0.0:
        raise DegenerateSegmentError("segment has no point below the plane")

    c_x = float(np.dot(weights, x) / total)
    c_y = float(np.dot(weights, y) / total)
    dx, dy = x - c_x, y - c_y
    moments = np.array([
        [np.dot(weights, dx * dx), np.dot(weights, dx * dy)],
        [np.dot(weights, dx * dy), np.dot(weights, dy * dy)],
    ]) / total
    _, axes = np.linalg.eigh(moments)
    major = axes[:, 1]
    pose = Pose(c_x=c_x, c_y=c_y, theta=math.atan2(major[1], major[0]))

    u, v = pose.to_dent_frame(x, y)
    l = max(float(u.max() - u.min()), segment.cell * 1e-3)
    w = max(float(v.max() - v.min()), segment.cell * 1e-3)
    deepest = int(np.argmin(h))
    s_x = float(np.clip(u[deepest] / l, -GUESS_SHIFT_CLAMP, GUESS_SHIFT_CLAMP))
    s_y = float(np.clip(v[deepest] / w, -GUESS_SHIFT_CLAMP, GUESS_SHIFT_CLAMP))
    params = DentParams(l=l, w=w, d=float(-h[deepest]), b=math.e, p=1.0, s_x=s_x, s_y=s_y)
    return params, pose


class _Problem:
    """Objective over the unconstrained vector of one fit mode."""

    def __init__(self, segment: DentSegment, mode: str):
        self.x = np.ascontiguousarray(segment.x)
        self.y = np.ascontiguousarray(segment.y)
        self.h = np.ascontiguousarray(segment.h)
        self.mode = mode
        self.size = 10 if mode == FULL7 else 6
        self.penalty = 1e3 * (float(np.dot(self.h, self.h)) + 1.0)

    def pack(self, params: DentParams, pose: Pose) -> np.ndarray:
        z = [pose.c_x, pose.c_y, pose.theta, math.log(params.l), math.log(params.w), math.log(params.d)]
        if self.mode == FULL7:
            s_x = min(max(params.s_x, -0.999 * SHIFT_BOUND), 0.999 * SHIFT_BOUND)
            s_y = min(max(params.s_y, -0.999 * SHIFT_BOUND), 0.999 * SHIFT_BOUND)
            z += [
                math.log(params.b - 1.0),
                math.log(params.p / (2.0 - params.p)),
                2.0 * math.atanh(s_x / SHIFT_BOUND),
                2.0 * math.atanh(s_y / SHIFT_BOUND),
            ]
        return np.array(z, dtype=float)

    def unpack(self, z: Sequence[float]) -> Tuple[Shape, Tuple[float, float, float]]:
        l, w, d = math.exp(z[3]), math.exp(z[4]), math.exp(z[5])
        if self.mode == FULL7:
            b = 1.0 + math.exp(z[6])
            p = 2.0 / (1.0 + math.exp(-z[7]))
            s_x = SHIFT_BOUND * math.tanh(z[8] / 2.0)
            s_y = SHIFT_BOUND * math.tanh(z[9] / 2.0)
        else:
            b, p, s_x, s_y = math.e, 1.0, 0.0, 0.0
        return (l, w, d, b, p, s_x, s_y), (float(z[0]), float(z[1]), wrap_angle(float(z[2])))

    def valid(self, shape: Shape) -> bool:
        l, w, d, b, p, s_x, s_y = shape
        if not (l > 0 and w > 0 and d > 0 and b > 1 and 0 < p < 2):
            return False
        return abs(s_y) < float(half_width_array(s_x, p))

    def __call__(self, z: np.ndarray) -> float:
        if not np.all(np.isfinite(z)):
            return self.penalty
        with np.errstate(over="ignore"):
            try:
                shape, (c_x, c_y, theta) = self.unpack(z)
            except OverflowError:
                return self.penalty
        if not self.valid(shape):
            return self.penalty
        l, w, d, b, p, s_x, s_y = shape
        cos_t, sin_t = math.cos(theta), math.sin(theta)
        dx = self.x - c_x
        dy = self.y - c_y
        u = (cos_t * dx + sin_t * dy) / l
        v = (cos_t * dy - sin_t * dx) / w
        model = ref_dent_array(u, v, b, p, s_x, s_y).filled(0.0)
        residual = self.h + d * model
        value = float(np.dot(residual, residual))
        return value if math.isfinite(value) else self.penalty

    def simplex(self, z0: np.ndarray, size: float) -> np.ndarray:
        steps = [0.05 * size, 0.05 * size, 0.1, 0.1, 0.1, 0.1]
        if self.mode == FULL7:
            steps += [0.3, 0.3, 0.2, 0.2]
        vertices = [z0]
        for k, step in enumerate(steps):
            vertex = z0.copy()
            vertex[k] += step
            vertices.append(vertex)
        return np.array(vertices)


def _starts(problem: _Problem, params: DentParams, pose: Pose, config: FitConfig) -> List[np.ndarray]:
    rng = np.random.default_rng(config.seed)
    starts = [problem.pack(params, pose)]
    for k in range(1, config.multistart):
        factors = rng.uniform(1.0 - PERTURB_SCALE, 1.0 + PERTURB_SCALE, size=3)
        dtheta = rng.uniform(-PERTURB_THETA, PERTURB_THETA)
        perturbed = params.model_copy(update={
            "l": params.l * factors[0],
            "w": params.w * factors[1],
            "d": params.d * factors[2],
            "p": START_P[k % 3],
            "b": START_B[(k // 3) % 3],
        })
        # the shift must stay inside the new boundary
        try:
            perturbed = DentParams(**perturbed.model_dump())
        except ValidationError:
            perturbed = perturbed.model_copy(update={"s_x": 0.0, "s_y": 0.0})
        starts.append(problem.pack(perturbed, pose.model_copy(update={"theta": pose.theta + dtheta})))
    return starts


def _run_start(problem: _Problem, z0: np.ndarray, size: float, n_points: int, config: FitConfig):
    result = minimize(
        problem,
        z0,
        method="Nelder-Mead",
        options={
            "maxfev": config.max_evals,
            "maxiter": config.max_evals,
            "fatol": config.tolerance * max(n_points, 1),
            "xatol": np.inf,
            "adaptive": True,
            "initial_simplex": problem.simplex(z0, size),
        },
    )
    return float(result.fun), int(result.nfev), bool(result.status == 0), np.asarray(result.x)


def model_srm(params: DentParams) -> SrmMeasures:
    """
    SRM box measures of a model sampled at max(l, w) / SRM_SAMPLES.

    The grid stays near SRM_SAMPLES cells on a side whatever the aspect
    ratio, so even a degenerate needle-shaped fit gets measures.
    """
    spacing = max(params.l, params.w) / SRM_SAMPLES
    return srm_box_measures(sample_height_field(params, spacing))


def _report(segment: DentSegment, mode: str, params: DentParams, pose: Pose, value: float,
            converged: bool, evaluations: int, total: int, start_index: int) -> FitReport:
    stats = residual_stats(segment, params, pose)
    srm = model_srm(params)
    return FitReport(
        mode=mode,
        params=params,
        pose=pose,
        mae=stats.mae,
        rmse=stats.rmse,
        max_residual=stats.max_residual,
        n_points=segment.count,
        objective=value,
        converged=converged,
        evaluations=evaluations,
        total_evaluations=total,
        start_index=start_index,
        srm=srm,
        weakly_identified=params.b > WEAK_BASE,
        multimodal=segment.multimodal,
    )


def _fit(segment: DentSegment, config: FitConfig, mode: str,
         seed_report: Optional[FitReport] = None) -> FitReport:
    params, pose = initial_guess(segment)
    problem = _Problem(segment, mode)
    starts = _starts(problem, params, pose, config)
    if seed_report is not None:
        starts.append(problem.pack(seed_report.params, seed_report.pose))

    size = min(params.l, params.w)
    n_points = segment.count
    logger.info(f"Fitting {mode} on {n_points} points with {len(starts)} start(s)")

    def run(z0):
        return _run_start(problem, z0, size, n_points, config)

    if config.workers > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            results = list(pool.map(run, starts))
    else:
        results = [run(z0) for z0 in starts]

    ranked = sorted(range(len(results)), key=lambda k: (results[k][0], results[k][1], k))
    total = sum(r[1] for r in results)
    for index in ranked:
        value, evaluations, converged, z = results[index]
        shape, (c_x, c_y, theta) = problem.unpack(z)
        if not problem.valid(shape):
            continue
        l, w, d, b, p, s_x, s_y = shape
        try:
            fitted = DentParams(l=l, w=w, d=d, b=b, p=p, s_x=s_x, s_y=s_y)
        except ValidationError:
            continue
        fitted_pose = Pose(c_x=c_x, c_y=c_y, theta=theta)
        report = _report(segment, mode, fitted, fitted_pose, value, converged, evaluations, total, index)
        logger.info(
            f"{mode} fit: start {index}, objective={value:.6g}, mae={report.mae:.4g} mm, "
            f"evaluations={evaluations}, converged={converged}"
        )
        if report.weakly_identified:
            logger.warning(f"Base b={fitted.b:.4g} exceeds {WEAK_BASE}; b is weakly identified")
        return report

    raise DegenerateSegmentError("no start produced a valid parameter set")


def fit_simplified(segment: DentSegment, config: FitConfig) -> FitReport:
    """
    Fit with b = e, p = 1 and s_x = s_y = 0 frozen.

    Only the pose, l, w and d are optimized.
    """
    return _fit(segment, config, SIMPLIFIED3)


def fit(segment: DentSegment, config: FitConfig) -> FitReport:
    """
    Fit the model to a segment in the mode named by `config.mode`.

    In `full7` mode the simplified solution is computed first and added as one
    more start, so the full objective never exceeds the simplified one.
    Running out of evaluations is reported with `converged=False`.

    Raises:
        DegenerateSegmentError: If the segment has nothing to fit.
    """
    if config.mode == SIMPLIFIED3:
        return fit_simplified(segment, config)
    return _fit(segment, config, FULL7, seed_report=fit_simplified(segment, config))


def compare_modes(segment: DentSegment, config: FitConfig) -> CompareReport:
    """
    Fit both modes on one segment.

    If the full fit ends with a larger MAE than the simplified one, the
    simplified solution (a valid full parameter set) is reported for both.
    """
    simplified = fit_simplified(segment, config)
    full = _fit(segment, config, FULL7, seed_report=simplified)
    if full.mae > simplified.mae:
        logger.info("Full fit MAE above simplified MAE; reporting the simplified solution")
        full = simplified.model_copy(update={"mode": FULL7})
    return CompareReport(simplified3=simplified, full7=full)
