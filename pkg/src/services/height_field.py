"""
`HF v1` grid text format.

    HF v1 <rows> <cols> <spacing_mm> <origin_x> <origin_y>
    <row 0 heights, space separated, `*` for cells outside the support>
    ...
"""

from typing import IO

import numpy as np

from framework.errors import ParseError
from models.dent import HeightField

MAGIC = ("HF", "v1")
SENTINEL = "*"


def write_height_field(field: HeightField, stream: IO[str]) -> None:
    """Write `field` to a text stream, values with 17 significant digits."""
    stream.write(
        f"HF v1 {field.rows} {field.cols} {field.spacing!r} {field.origin_x!r} {field.origin_y!r}\n"
    )
    mask = np.ma.getmaskarray(field.heights)
    values = np.asarray(field.heights.filled(0.0))
    for i in range(field.rows):
        cells = (SENTINEL if mask[i, j] else f"{values[i, j]:.17g}" for j in range(field.cols))
        stream.write(" ".join(cells) + "\n")


def read_height_field(stream: IO[str]) -> HeightField:
    """
    Read a field written by `write_height_field`.

    Raises:
        ParseError: With the line number on a bad header, token or row length.
    """
    header = stream.readline().split()
    if len(header) != 7 or tuple(header[:2]) != MAGIC:
        raise ParseError("expected header 'HF v1 rows cols spacing origin_x origin_y'", line=1)
    try:
        rows, cols = int(header[2]), int(header[3])
        spacing, origin_x, origin_y = (float(v) for v in header[4:7])
    except ValueError as e:
        raise ParseError(f"bad header value: {e}", line=1) from e
    if rows <= 0 or cols <= 0:
        raise ParseError(f"grid must have positive rows and columns, got {rows} x {cols}", line=1)

    values = np.zeros((rows, cols))
    mask = np.zeros((rows, cols), dtype=bool)
    for i in range(rows):
        line_no = i + 2
        tokens = stream.readline().split()
        if len(tokens) != cols:
            raise ParseError(f"expected {cols} values, found {len(tokens)}", line=line_no)
        for j, token in enumerate(tokens):
            if token == SENTINEL:
                mask[i, j] = True
                continue
            try:
                values[i, j] = float(token)
            except ValueError:
                raise ParseError(f"malformed height {token!r}", line=line_no)

    try:
        return HeightField(spacing=spacing, origin_x=origin_x, origin_y=origin_y,
                           heights=np.ma.masked_array(values, mask=mask))
    except ValueError as e:
        raise ParseError(f"invalid grid: {e}", line=1) from e
