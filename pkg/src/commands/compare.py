"""
`dentfit compare`: simplified versus full fits of every dent in a cloud.
"""

import argparse
import logging

from framework.config import Settings
from services.heatmap import render_heatmap, residual_field
from services.pipeline import compare_segments
from commands.common import (
    EXIT_NO_DENTS,
    EXIT_OK,
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
    parser = subparsers.add_parser("compare", help="Compare simplified3 and full7 fits")
    add_pipeline_arguments(parser, settings)
    add_heatmap_arguments(parser)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, settings: Settings) -> int:
    extraction = extract(args, settings)
    if not extraction.segments:
        logger.warning(f"No dent found in {args.input}")
        if args.allow_empty:
            emit([], args.out)
        return EXIT_NO_DENTS

    results = compare_segments(extraction, fit_config(args), args.depth_threshold)
    for k, (_, report) in enumerate(results):
        logger.info(f"Segment {k}: mae_ratio={report.mae_ratio:.4g}")

    # heatmaps show the full fit residuals
    fields = []
    if args.heatmap:
        fields = [
            residual_field(segment, report.full7.params, report.full7.pose, args.pitch)
            for segment, report in results
        ]

    emit([report.to_document() for _, report in results], args.out)
    if args.segments_out:
        write_segments([segment for segment, _ in results], args.segments_out)
    if fields:
        spec = heatmap_spec(args)
        for field, path in zip(fields, indexed_paths(args.heatmap, len(fields))):
            render_heatmap(field, spec, path)
    return EXIT_OK
