import os

import pytest

# Set testing environment before the CLI configures logging
os.environ["TESTING"] = "true"

from app import main


@pytest.fixture
def dentfit():
    """Run the CLI in-process and return its exit code."""
    def run(*argv):
        return main([str(a) for a in argv])
    return run


@pytest.fixture
def small_dent(tmp_path, dentfit):
    """A 12 x 8 x 1 mm elliptic dent sampled at 0.5 mm."""
    path = tmp_path / "small.xyz"
    assert dentfit("synth", path, "--preset", "row5", "--l", 12, "--w", 8, "--d", 1) == 0
    return path
