import logging
import sys
from pathlib import Path

import numpy as np
import pytest

PROJECT_ROOT = Path(__file__).resolve().parent
if str(PROJECT_ROOT) not in sys.path:
    sys.path.insert(0, str(PROJECT_ROOT))

from core.domain.models import UDKEConfig, UnfoldConfig, DegradationConfig, MetricsConfig  # noqa: E402
from core.utils.localization.translator import Translator  # noqa: E402


@pytest.fixture
def rng():
    """Seeded generator so every test run sees the same data."""
    return np.random.default_rng(20240607)


@pytest.fixture
def logger():
    return logging.getLogger('UDKE')


@pytest.fixture
def translator():
    return Translator("en")


@pytest.fixture
def udke_config():
    return UDKEConfig(unfolding=UnfoldConfig(), degradation=DegradationConfig(), metrics=MetricsConfig())


def smooth_image(rng: np.random.Generator, channels: int, h: int, w: int) -> np.ndarray:
    """Textured test image in [0, 1]: low-pass noise plus a little white noise."""
    from scipy import ndimage
    base = rng.random((channels, h, w))
    smooth = ndimage.gaussian_filter(base, sigma=(0, 1.2, 1.2), mode='wrap')
    smooth = (smooth - smooth.min()) / (smooth.max() - smooth.min() + 1e-12)
    return np.clip(0.8 * smooth + 0.2 * base, 0.0, 1.0)


@pytest.fixture
def make_image(rng):
    def _make(channels: int, h: int, w: int) -> np.ndarray:
        return smooth_image(rng, channels, h, w)
    return _make
