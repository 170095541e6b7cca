import random

import numpy as np
import pytest

from streamres.ingest import Record


def make_records(weights, stream_id="s"):
    return [Record(stream_id, i, (float(i),), w) for i, w in enumerate(weights)]


@pytest.fixture
def rng():
    return random.Random(12345)


@pytest.fixture
def blobs():
    """300 points around three well-separated means, sigma 0.1."""
    means = np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]])
    g = np.random.default_rng(7)
    lab = g.integers(0, 3, 300)
    return means, means[lab] + 0.1 * g.standard_normal((300, 2))
