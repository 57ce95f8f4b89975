"""
`dentfit fit`: fit the dent model to every dent found in a cloud.
"""

import argparse
import logging

from framework.config import Settings
from services.heatmap import render_heatmap, residual_field
from services.pipeline import fit_segments
from commands.common import (
    EXIT_NO_DENTS,
    EXIT_OK,
    MODES,
    add_heatmap_arguments,
    add_pipeline_arguments,
    emit,
    extract,
    fit_config,
    heatmap_spec,
    indexed_paths,
    write_segments,
)

logger = logging.getLogger(__name__)


def register(subparsers, settings: Settings) -> None:
    parser = subparsers.add_parser("fit", help="Fit the dent model to a scanned cloud")
    add_pipeline_arguments(parser, settings)
    add_heatmap_arguments(parser)
    parser.add_argument("--mode", choices=MODES, default=MODES[0], help="Parameters to optimize")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, settings: Settings) -> int:
    """
    Writes one FitReport document per segment, in segment order, as a JSON
    array. Returns 2 when the cloud holds no dent.
    """
    extraction = extract(args, settings)
    if not extraction.segments:
        logger.warning(f"No dent found in {args.input}")
        if args.allow_empty:
            emit([], args.out)
        return EXIT_NO_DENTS

    config = fit_config(args)
    results = fit_segments(extraction, config, args.depth_threshold)

    fields = []
    if args.heatmap:
        fields = [residual_field(segment, report.params, report.pose, args.pitch) for segment, report in results]

    emit([report.to_document() for _, report in results], args.out)
    if args.segments_out:
        write_segments([segment for segment, _ in results], args.segments_out)
    if fields:
        spec = heatmap_spec(args)
        for field, path in zip(fields, indexed_paths(args.heatmap, len(fields))):
            render_heatmap(field, spec, path)
    return EXIT_OK
