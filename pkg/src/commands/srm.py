"""
`dentfit srm`: Structural Repair Manual box measures.

The input may be a `fit`/`compare` JSON report (measures of each fitted
model), an `HF v1` grid, or a point cloud (measures of each segment's deep
points rasterized by their lowest height).
"""

import argparse
import logging
from pathlib import Path
from typing import List

from framework.config import Settings
from models.dent import SrmMeasures
from services.fitting import model_srm
from services.heatmap import rasterize_points
from services.height_field import read_height_field
from services.model_core import sample_height_field
from services.srm import srm_box_measures
from commands.common import (
    EXIT_NO_DENTS,
    EXIT_OK,
    add_extraction_arguments,
    add_output_argument,
    emit,
    extract,
    load_reports,
    positive_float,
)

logger = logging.getLogger(__name__)

CLOUD_SUFFIXES = (".xyz", ".ply")


def register(subparsers, settings: Settings) -> None:
    parser = subparsers.add_parser("srm", help="Box measures of fitted models, grids or clouds")
    parser.add_argument("input", type=Path, help="Report (.json), HF v1 grid, or cloud (.xyz/.ply)")
    parser.add_argument("--spacing", type=positive_float, help="Sampling spacing for fitted models, mm")
    parser.add_argument("--pitch", type=positive_float, default=0.5, help="Raster pitch for clouds, mm")
    add_extraction_arguments(parser, settings)
    add_output_argument(parser)
    parser.set_defaults(handler=run)


def _from_reports(args: argparse.Namespace, settings: Settings) -> List[SrmMeasures]:
    measures = []
    for report in load_reports(args.input):
        if args.spacing:
            field = sample_height_field(report.params, args.spacing, cell_cap=settings.cell_cap)
            measures.append(srm_box_measures(field))
        else:
            measures.append(model_srm(report.params))
    return measures


def _from_cloud(args: argparse.Namespace, settings: Settings) -> List[SrmMeasures]:
    extraction = extract(args, settings)
    measures = []
    for segment in extraction.segments:
        deep = segment.h <= -args.depth_threshold
        field = rasterize_points(segment.points[deep, :2], segment.h[deep], args.pitch, reducer="min",
                                 cell_cap=settings.cell_cap)
        measures.append(srm_box_measures(field))
    return measures


def run(args: argparse.Namespace, settings: Settings) -> int:
    suffix = args.input.suffix.lower()
    if suffix == ".json":
        measures = _from_reports(args, settings)
    elif suffix in CLOUD_SUFFIXES:
        measures = _from_cloud(args, settings)
    else:
        with open(args.input, "r", encoding="utf-8") as handle:
            measures = [srm_box_measures(read_height_field(handle))]

    if not measures:
        logger.warning(f"Nothing to measure in {args.input}")
        return EXIT_NO_DENTS
    for m in measures:
        if m.discrepancy > 0:
            logger.info(f"Depth at the width section is {m.discrepancy:.4g} mm shallower than the maximum depth")
    emit([m.model_dump() for m in measures], args.out)
    return EXIT_OK
