import numpy as np
import pytest

from thermact.core import load_manifest
from thermact.synth import generate_corpus


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    """3 subjects x 1 rep x 7 activities: enough for LOSO and 3-fold."""
    out = tmp_path_factory.mktemp("small_corpus")
    summary = generate_corpus(out, subjects=3, reps=1, seed=7)
    return load_manifest(summary.manifest_path)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
