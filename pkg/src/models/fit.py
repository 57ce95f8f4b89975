"""
Fitting Schemas

This module defines:
- `FitConfig`, the options of a single model fit.
- `ResidualStats`, residual metrics of a parameter set against a segment.
- `FitReport`, the outcome of fitting one dent segment.
"""

import math
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from models.dent import DentParams, Pose, SrmMeasures

FULL7 = "full7"
SIMPLIFIED3 = "simplified3"
FitMode = Literal["full7", "simplified3"]

# b above this is reported, not capped
WEAK_BASE = 50.0


class FitConfig(BaseModel):
    """
    Options of a fit.

    Attributes:
        mode (str): `full7` optimizes all parameters; `simplified3` freezes
            b = e, p = 1 and s = 0.
        multistart (int): Number of starts.
        max_evals (int): Objective evaluation budget per start.
        tolerance (float): Stop when the simplex objective spread drops below
            `tolerance * n_points`, mm^2 per point.
        ring_width (float): Anchor ring width, mm (applied by the pipeline).
        seed (int): Seed of the start perturbations.
        workers (int): Threads running starts concurrently. Results do not
            depend on it.

    Example:
        {"mode": "full7", "multistart": 8, "max_evals": 20000, "seed": 0}
    """

    model_config = ConfigDict(frozen=True)

    mode: FitMode = FULL7
    multistart: int = Field(8, ge=1)
    max_evals: int = Field(20_000, ge=1)
    tolerance: float = Field(1e-10, gt=0)
    ring_width: float = Field(4.0, ge=0)
    seed: int = 0
    workers: int = Field(1, ge=1)


class ResidualStats(BaseModel):
    """
    Residual metrics.

    Attributes:
        mae (float): Mean absolute residual, mm.
        rmse (float): Root mean square residual, mm.
        max_residual (float): Largest absolute residual, mm.
        residuals (numpy.ndarray): Per-point residual `h - model`, mm.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mae: float = Field(ge=0)
    rmse: float = Field(ge=0)
    max_residual: float = Field(ge=0)
    residuals: np.ndarray

    @classmethod
    def from_residuals(cls, residuals: np.ndarray) -> "ResidualStats":
        residuals = np.asarray(residuals, dtype=float)
        magnitude = np.abs(residuals)
        return cls(
            mae=float(magnitude.mean()),
            rmse=float(math.sqrt(np.mean(residuals ** 2))),
            max_residual=float(magnitude.max()),
            residuals=residuals,
        )


class FitReport(BaseModel):
    """
    Result of fitting one segment.

    Attributes:
        mode (str): Fit mode that produced the report.
        params (DentParams): Fitted parameters.
        pose (Pose): Fitted placement in the local plane frame.
        mae (float): Mean absolute residual, mm.
        rmse (float): Root mean square residual, mm.
        max_residual (float): Largest absolute residual, mm.
        n_points (int): Points used, anchor ring included.
        objective (float): Sum of squared residuals, mm^2.
        converged (bool): The winning start met the tolerance within budget.
        evaluations (int): Objective evaluations of the winning start.
        total_evaluations (int): Objective evaluations across all starts.
        start_index (int): Index of the winning start.
        srm (SrmMeasures): Box measures of the fitted model.
        weakly_identified (bool): b exceeded the identifiability threshold.
        multimodal (bool): The segment looked like overlapping dents.
    """

    model_config = ConfigDict(frozen=True)

    mode: FitMode
    params: DentParams
    pose: Pose
    mae: float = Field(ge=0)
    rmse: float = Field(ge=0)
    max_residual: float = Field(ge=0)
    n_points: int = Field(ge=0)
    objective: float = Field(ge=0)
    converged: bool
    evaluations: int = Field(ge=0)
    total_evaluations: int = Field(ge=0)
    start_index: int = Field(0, ge=0)
    srm: SrmMeasures
    weakly_identified: bool = False
    multimodal: bool = False

    @model_validator(mode="after")
    def metrics_bounded(self):
        slack = 1e-12 * max(1.0, self.max_residual)
        if self.mae > self.max_residual + slack or self.rmse > self.max_residual + slack:
            raise ValueError("mae and rmse cannot exceed max_residual")
        return self

    def to_document(self) -> dict:
        """Nested document with the fixed top-level keys of the JSON schema."""
        return {
            "mode": self.mode,
            "params": self.params.model_dump(),
            "pose": self.pose.model_dump(),
            "metrics": {
                "mae": self.mae,
                "rmse": self.rmse,
                "max_residual": self.max_residual,
                "n_points": self.n_points,
                "objective": self.objective,
            },
            "srm": self.srm.model_dump(),
            "convergence": {
                "converged": self.converged,
                "evaluations": self.evaluations,
                "total_evaluations": self.total_evaluations,
                "start_index": self.start_index,
            },
            "flags": {
                "weakly_identified": self.weakly_identified,
                "multimodal": self.multimodal,
            },
        }

    @classmethod
    def from_document(cls, document: dict) -> "FitReport":
        return cls(
            mode=document["mode"],
            params=DentParams(**document["params"]),
            pose=Pose(**document["pose"]),
            srm=SrmMeasures(**{k: v for k, v in document["srm"].items() if k != "discrepancy"}),
            **{k: v for k, v in document["metrics"].items()},
            **document["convergence"],
            **document.get("flags", {}),
        )
