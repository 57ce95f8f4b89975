"""
Arguments and output helpers shared by the dentfit commands.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, List, Optional, Sequence

from framework.config import Settings
from framework.errors import SchemaError
from framework.files import atomic_write
from models.cloud import DentSegment
from models.fit import FULL7, SIMPLIFIED3, FitConfig, FitReport
from models.report import HeatmapSpec, dumps_document
from services.cloud_io import read_cloud, write_xyz
from services.pipeline import PLANE_METHODS, Extraction, extract_segments

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_NO_DENTS = 2

MODES = (FULL7, SIMPLIFIED3)


def positive_float(value: str) -> float:
    number = float(value)
    if not number > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return number


def non_negative_float(value: str) -> float:
    number = float(value)
    if not number >= 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {value}")
    return number


def positive_int(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return number


def add_output_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", type=Path, help="Output file (default: stdout)")


def add_extraction_arguments(parser: argparse.ArgumentParser, settings: Settings) -> None:
    """Plane removal and segmentation flags."""
    parser.add_argument("--depth-threshold", type=positive_float, default=settings.depth_threshold,
                        help="Segmentation threshold below the plane, mm")
    parser.add_argument("--cell", type=positive_float, default=settings.cell, help="Segmentation cell, mm")
    parser.add_argument("--min-points", type=positive_int, default=settings.min_points,
                        help="Smallest segment kept")
    parser.add_argument("--plane", choices=PLANE_METHODS, default="ransac", help="Base plane estimator")
    parser.add_argument("--inlier-tol", type=positive_float,
                        help="RANSAC inlier distance, mm (default: the depth threshold)")
    parser.add_argument("--seed", type=int, default=0, help="Seed of RANSAC and start perturbations")


def add_pipeline_arguments(parser: argparse.ArgumentParser, settings: Settings) -> None:
    """Flags of the cloud-to-report pipeline, defaults taken from `settings`."""
    parser.add_argument("input", type=Path, help="Point cloud (.xyz or ascii .ply)")
    add_extraction_arguments(parser, settings)
    parser.add_argument("--multistart", type=positive_int, default=settings.multistart,
                        help="Optimizer starts per fit")
    parser.add_argument("--max-evals", type=positive_int, default=settings.max_evals,
                        help="Objective evaluations per start")
    parser.add_argument("--ring-width", type=non_negative_float, default=settings.ring_width,
                        help="Anchor ring width, mm")
    parser.add_argument("--workers", type=positive_int, default=settings.workers,
                        help="Threads running optimizer starts")
    parser.add_argument("--allow-empty", action="store_true",
                        help="Write [] when no dent is found (exit code stays 2)")
    parser.add_argument("--segments-out", type=Path,
                        help="Anchored segments in the plane frame (.xyz); indexed per segment")
    add_output_argument(parser)


def extract(args: argparse.Namespace, settings: Settings) -> Extraction:
    """Read `args.input` and cut it into segments with the extraction flags."""
    return extract_segments(
        read_cloud(args.input),
        args.depth_threshold,
        args.cell,
        args.min_points,
        seed=args.seed,
        plane=args.plane,
        inlier_tol=args.inlier_tol,
        cell_cap=settings.cell_cap,
    )


def add_heatmap_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--heatmap", type=Path, help="Residual heatmap (.ppm); indexed per segment")
    parser.add_argument("--scale", type=positive_float, default=1.0, help="Value drawn pure red, mm")
    parser.add_argument("--pitch", type=positive_float, default=0.5, help="Heatmap pixel pitch, mm")


def fit_config(args: argparse.Namespace, mode: Optional[str] = None) -> FitConfig:
    return FitConfig(
        mode=mode or getattr(args, "mode", FULL7),
        multistart=args.multistart,
        max_evals=args.max_evals,
        ring_width=args.ring_width,
        seed=args.seed,
        workers=args.workers,
    )


def heatmap_spec(args: argparse.Namespace) -> HeatmapSpec:
    return HeatmapSpec(scale=args.scale, pitch=args.pitch)


def indexed_paths(path: Path, count: int) -> List[Path]:
    """`path` itself for one file, `stem-<k><suffix>` for several."""
    if count == 1:
        return [path]
    return [path.with_name(f"{path.stem}-{k}{path.suffix}") for k in range(count)]


def write_segments(segments: Sequence[DentSegment], path: Path) -> None:
    """Each segment's (x, y, h) points as `.xyz`, in segment order."""
    for k, (segment, target) in enumerate(zip(segments, indexed_paths(path, len(segments)))):
        with atomic_write(target) as handle:
            write_xyz(segment.points, handle, header=f"dentfit segment {k}: {segment.count} points, plane frame")
        logger.info(f"Wrote {target}")


def emit(document: Any, out: Optional[Path]) -> None:
    """Write a document as stable JSON to `out`, or to stdout."""
    text = dumps_document(document)
    if out is None:
        sys.stdout.write(text)
        return
    with atomic_write(out) as handle:
        handle.write(text)
    logger.info(f"Wrote {out}")


def load_documents(path: Path) -> List[dict]:
    """Read a JSON report file holding one document or a list of them."""
    with open(path, "r", encoding="utf-8") as handle:
        document = json.load(handle)
    return document if isinstance(document, list) else [document]


def load_reports(path: Path) -> List[FitReport]:
    """
    Fit reports from a `fit` or `compare` output file.

    Compare documents contribute their full7 report.

    Raises:
        SchemaError: If a document lacks a report field.
    """
    reports = []
    for document in load_documents(path):
        if "full7" in document:
            document = document["full7"]
        try:
            reports.append(FitReport.from_document(document))
        except (KeyError, TypeError) as e:
            raise SchemaError(f"{path} is not a fit report: missing {e}") from e
    return reports
