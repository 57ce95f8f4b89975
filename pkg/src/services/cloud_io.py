"""
Point cloud ingestion and export.

Supported inputs are `.xyz` text (one `x y z [intensity]` point per line, `#`
comments) and ASCII `.ply`. Binary scanner formats are rejected with
`UnsupportedFormatError`.
"""

import io
import logging
from pathlib import Path
from typing import IO, Optional, Union

import numpy as np
from plyfile import PlyData, PlyParseError

from framework.errors import (
    InsufficientDataError,
    ParseError,
    SchemaError,
    UnsupportedFormatError,
)
from models.cloud import PointCloud

logger = logging.getLogger(__name__)

MIN_POINTS = 3
XYZ_FORMAT = "%.12g"


def _require_points(count: int) -> None:
    if count < MIN_POINTS:
        raise InsufficientDataError(f"need at least {MIN_POINTS} points, found {count}")


def parse_xyz(stream: IO[str]) -> PointCloud:
    """
    Parse whitespace-separated triples, one point per line.

    Text after `#` is ignored, as are blank lines. A fourth column is read as
    intensity when every point carries one.

    Raises:
        ParseError: On a malformed or non-finite token, with its line number.
        InsufficientDataError: If fewer than 3 points were read.
    """
    points = []
    intensity = []
    for line_no, line in enumerate(stream, start=1):
        content = line.split("#", 1)[0].split()
        if not content:
            continue
        if len(content) < 3:
            raise ParseError(f"expected at least 3 values, found {len(content)}", line=line_no)
        try:
            values = [float(token) for token in content[:4]]
        except ValueError as e:
            raise ParseError(f"malformed number: {e}", line=line_no) from e
        if not np.all(np.isfinite(values)):
            raise ParseError("coordinates must be finite", line=line_no)
        points.append(values[:3])
        intensity.append(values[3] if len(values) > 3 else None)

    _require_points(len(points))
    has_intensity = all(value is not None for value in intensity)
    return PointCloud(
        points=np.asarray(points, dtype=float),
        intensity=np.asarray(intensity, dtype=float) if has_intensity else None,
    )


def write_xyz(points: Union[PointCloud, np.ndarray], stream: IO[str], header: Optional[str] = None) -> None:
    """Write (N, 3) points as `.xyz` text with 12 significant digits."""
    array = points.points if isinstance(points, PointCloud) else np.asarray(points, dtype=float)
    np.savetxt(stream, array[:, :3], fmt=XYZ_FORMAT, header=header or "", comments="# ")


def _ply_format(raw: bytes) -> str:
    """Read the `format` line of a PLY header without parsing the body."""
    if not raw.startswith(b"ply"):
        raise SchemaError("missing 'ply' magic number")
    end = raw.find(b"end_header")
    header = raw[: end if end >= 0 else len(raw)]
    for line in header.splitlines():
        words = line.split()
        if len(words) >= 2 and words[0] == b"format":
            return words[1].decode("ascii", errors="replace")
    raise SchemaError("PLY header has no format line")


def parse_ply_ascii(stream: Union[IO[str], IO[bytes]]) -> PointCloud:
    """
    Extract vertex positions from an ASCII PLY file.

    Faces and any vertex properties other than x, y and z are ignored.

    Raises:
        UnsupportedFormatError: For binary PLY, naming the detected format.
        SchemaError: If the vertex element or an x/y/z property is missing.
        ParseError: If the body does not match the header.
        InsufficientDataError: If fewer than 3 vertices are present.
    """
    raw = stream.read()
    if isinstance(raw, str):
        raw = raw.encode("utf-8")

    fmt = _ply_format(raw)
    if fmt != "ascii":
        raise UnsupportedFormatError(f"PLY format '{fmt}' is not supported, only ascii", format=fmt)

    try:
        ply = PlyData.read(io.BytesIO(raw))
    except PlyParseError as e:
        raise ParseError(f"invalid PLY data: {e}") from e

    try:
        vertex = ply["vertex"]
    except KeyError:
        raise SchemaError("PLY file has no vertex element")

    names = vertex.data.dtype.names or ()
    missing = [axis for axis in ("x", "y", "z") if axis not in names]
    if missing:
        raise SchemaError(f"vertex element lacks properties: {', '.join(missing)}")

    points = np.column_stack([np.asarray(vertex.data[axis], dtype=float) for axis in ("x", "y", "z")])
    _require_points(len(points))
    if not np.all(np.isfinite(points)):
        raise ParseError("vertex coordinates must be finite")
    return PointCloud(points=points)


def read_cloud(path: Union[str, Path]) -> PointCloud:
    """
    Load a cloud from disk, choosing the parser by file suffix.

    Raises:
        UnsupportedFormatError: For suffixes other than `.xyz` and `.ply`.
        OSError: If the file cannot be opened.
    """
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".xyz":
        with open(path, "r", encoding="utf-8") as handle:
            cloud = parse_xyz(handle)
    elif suffix == ".ply":
        with open(path, "rb") as handle:
            cloud = parse_ply_ascii(handle)
    else:
        raise UnsupportedFormatError(f"unsupported point cloud suffix '{suffix}' for {path}", format=suffix)
    logger.info(f"Read {len(cloud)} points from {path}")
    return cloud
