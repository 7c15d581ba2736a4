import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from entropyfs.grid import GridFunction


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def random_grid8(rng):
    return GridFunction(8, rng.uniform(0.05, 4.0, 256))


@pytest.fixture(scope="session")
def rough_weight8(rng):
    return GridFunction(8, np.exp(1.2 * rng.standard_normal(256)))
