"""
`dentfit render`: depth heatmap of a grid or of fitted models.
"""

import argparse
import logging
from pathlib import Path

from framework.config import Settings
from framework.errors import EmptyFieldError
from models.report import HeatmapSpec
from services.heatmap import render_heatmap
from services.height_field import read_height_field
from services.model_core import sample_height_field
from commands.common import EXIT_OK, indexed_paths, load_reports, positive_float

logger = logging.getLogger(__name__)


def register(subparsers, settings: Settings) -> None:
    parser = subparsers.add_parser("render", help="Render an HF v1 grid or fitted models as a PPM heatmap")
    parser.add_argument("input", type=Path, help="HF v1 grid, or a fit/compare report (.json)")
    parser.add_argument("--out", type=Path, required=True, help="Output image (.ppm); indexed per report")
    parser.add_argument("--scale", type=positive_float, default=1.0, help="Depth drawn pure red, mm")
    parser.add_argument("--pitch", type=positive_float, default=0.5, help="Pixel pitch for fitted models, mm")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, settings: Settings) -> int:
    spec = HeatmapSpec(scale=args.scale, pitch=args.pitch)
    if args.input.suffix.lower() == ".json":
        fields = [
            sample_height_field(report.params, spec.pitch, cell_cap=settings.cell_cap)
            for report in load_reports(args.input)
        ]
    else:
        with open(args.input, "r", encoding="utf-8") as handle:
            fields = [read_height_field(handle)]

    if not fields:
        raise EmptyFieldError(f"{args.input} holds no report to render")

    for field, path in zip(fields, indexed_paths(args.out, len(fields))):
        render_heatmap(field, spec, path)
    return EXIT_OK
