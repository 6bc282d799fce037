import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("opuc", max_examples=40, deadline=None)
settings.load_profile("opuc")

SAMPLES = 0.45 * np.exp(2j * np.pi * (np.arange(16) + 0.21) / 16)


@pytest.fixture
def samples():
    return SAMPLES.copy()


def rel(a, b):
    a, b = np.asarray(a), np.asarray(b)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))
