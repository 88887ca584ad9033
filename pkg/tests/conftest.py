import pytest
import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from povmlab.models.operators import HermitianOperator
from povmlab.models.config import RunConfig
from povmlab.utils.numeric_utils import make_rng


@pytest.fixture
def rng():
    """Fixture for a seeded random generator."""
    return make_rng(12345)


@pytest.fixture
def random_hermitian(rng):
    """Fixture for a random 8x8 Hermitian operator."""
    a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    return HermitianOperator.symmetrized(a)


@pytest.fixture
def projection_matrix():
    """Fixture for the projection onto span{(1, 1)/sqrt(2)}."""
    return 0.5 * np.array([[1.0, 1.0], [1.0, 1.0]])


@pytest.fixture
def output_dir(tmp_path):
    """Fixture for a fresh report directory."""
    path = tmp_path / "reports"
    return str(path)


@pytest.fixture
def sample_config():
    """Fixture for a small, fast run configuration."""
    return RunConfig(
        observable="phase-can:dim=16",
        analyzers=["norm1", "uc-probe"],
        families={"uc-probe": "shrinking-arc:count=10,width=1"},
        dims=[8, 16],
        singletons=[0.0, 1.0],
        seed=7,
    )


@pytest.fixture
def sample_config_yaml():
    """Fixture for a YAML run configuration."""
    return """observable: "unsharp-number:eps=0.5,dim=40"
analyzers:
  - norm1
  - kernel-axioms
singletons: [0, 1, 2]
seed: 11
"""

