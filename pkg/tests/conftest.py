import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from specavg import SyntheticSpec, synth_symmetric


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(scope="session")
def small_model():
    """Dense incoherent 30-dimensional ground truth with a healthy gap."""
    spec = SyntheticSpec(n=30, spectrum=(1.0, 0.35, 0.2, 0.1), seed=5)
    m, model = synth_symmetric(spec)
    return m, model.with_alpha()


def random_symmetric(n, seed, scale=1.0):
    gen = np.random.default_rng(seed)
    a = gen.standard_normal((n, n)) * scale
    return 0.5 * (a + a.T)
