"""
`dentfit synth`: write a synthetic dent cloud.
"""

import argparse
import logging
import math

from framework.config import Settings
from framework.files import atomic_write
from models.dent import DentParams, Pose
from services.cloud_io import write_xyz
from services.height_field import write_height_field
from services.model_core import PRESETS, sample_height_field
from services.synthesis import preset, synthesize_cloud
from commands.common import EXIT_OK, non_negative_float, positive_float

logger = logging.getLogger(__name__)

SHAPE_FLAGS = ("l", "w", "d", "b", "p", "s_x", "s_y")


def register(subparsers, settings: Settings) -> None:
    parser = subparsers.add_parser("synth", help="Generate a synthetic dent cloud (.xyz)")
    parser.add_argument("out", help="Output .xyz file")
    parser.add_argument("--preset", choices=sorted(PRESETS), default="row1",
                        help="Base parameter set; explicit shape flags override it")
    for name in SHAPE_FLAGS:
        parser.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float, help=f"Dent parameter {name}")
    parser.add_argument("--cx", type=float, default=0.0, help="Dent center x, mm")
    parser.add_argument("--cy", type=float, default=0.0, help="Dent center y, mm")
    parser.add_argument("--theta", type=float, default=0.0, help="Dent rotation, degrees")
    parser.add_argument("--spacing", type=positive_float, default=0.5, help="Sample spacing, mm")
    parser.add_argument("--margin", type=non_negative_float, help="Flat border, mm")
    parser.add_argument("--noise", type=non_negative_float, default=0.0, help="Height noise sigma, mm")
    parser.add_argument("--tilt", type=float, default=0.0, help="Patch tilt about x, degrees")
    parser.add_argument("--skew", type=float, default=0.0, help="Asymmetric depth perturbation")
    parser.add_argument("--second", choices=sorted(PRESETS), help="Preset of a second dent")
    parser.add_argument("--second-at", nargs=2, type=float, metavar=("CX", "CY"), default=(0.0, 0.0),
                        help="Center of the second dent, mm")
    parser.add_argument("--seed", type=int, default=0, help="Noise seed")
    parser.add_argument("--hf", help="Also write the noiseless model as an HF v1 grid")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace, settings: Settings) -> int:
    base = preset(args.preset).model_dump()
    base.update({name: getattr(args, name) for name in SHAPE_FLAGS if getattr(args, name) is not None})
    params = DentParams(**base)
    pose = Pose(c_x=args.cx, c_y=args.cy, theta=math.radians(args.theta))

    secondary = None
    if args.second:
        secondary = [(preset(args.second), Pose(c_x=args.second_at[0], c_y=args.second_at[1]))]

    cloud = synthesize_cloud(
        params, pose,
        spacing=args.spacing,
        margin=args.margin,
        noise=args.noise,
        seed=args.seed,
        tilt=args.tilt,
        skew=args.skew,
        secondary=secondary,
        cell_cap=settings.cell_cap,
    )
    field = sample_height_field(params, args.spacing, cell_cap=settings.cell_cap) if args.hf else None

    with atomic_write(args.out) as handle:
        write_xyz(cloud, handle, header=f"dentfit synth {params.model_dump_json()}")
    if field is not None:
        with atomic_write(args.hf) as handle:
            write_height_field(field, handle)

    logger.info(f"Wrote {len(cloud)} points to {args.out}")
    return EXIT_OK
