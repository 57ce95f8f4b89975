"""
Whole-file atomic writes.

Outputs are written to a temporary file in the destination directory and
renamed into place, so a failed command never leaves a partial file.
"""

import os
import tempfile
from contextlib import contextmanager
from pathlib import Path
from typing import IO, Iterator, Union

PathLike = Union[str, os.PathLike]


@contextmanager
def atomic_write(path: PathLike, mode: str = "w") -> Iterator[IO]:
    """
    Open a temporary sibling of `path` for writing and rename it on success.

    Args:
        path: Destination file.
        mode: `"w"` for text or `"wb"` for bytes.

    Yields:
        The open temporary file.

    Raises:
        OSError: With the destination path in the message if the directory is
            missing or not writable.
    """
    target = Path(path)
    directory = target.parent if str(target.parent) else Path(".")
    try:
        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=directory)
    except OSError as e:
        raise OSError(f"Cannot write {target}: {e.strerror or e}") from e

    encoding = None if "b" in mode else "utf-8"
    try:
        with os.fdopen(fd, mode, encoding=encoding) as handle:
            yield handle
        os.replace(tmp_name, target)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
