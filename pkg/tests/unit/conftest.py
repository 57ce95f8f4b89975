import os

import numpy as np
import pytest

# Set testing environment before any dentfit module configures logging
os.environ["TESTING"] = "true"

from models.dent import DentParams


@pytest.fixture
def row1():
    return DentParams(l=30, w=30, d=5, b=2, p=1)


@pytest.fixture
def shifted():
    return DentParams(l=30, w=15, d=5, b=np.e, p=1, s_x=0.2, s_y=0)
