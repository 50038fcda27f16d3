import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vlcnoma import NoiseConfig, PhyContext, PowerConfig


@pytest.fixture
def ctx16():
    """Default network parameters with K = 16."""
    return PhyContext(PowerConfig(35.0), NoiseConfig(1e-19, 20e6, 16))


@pytest.fixture
def ctx8():
    """Tiny K = 8 context for exhaustive-search instances."""
    return PhyContext(PowerConfig(35.0), NoiseConfig(1e-19, 20e6, 8))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
