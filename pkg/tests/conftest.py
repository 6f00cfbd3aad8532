import numpy as np
import pytest

from vcmbench.images import PlanarImage, from_rgb_array


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_rgb(height: int, width: int, seed: int = 0) -> PlanarImage:
    gen = np.random.default_rng(seed)
    return from_rgb_array(gen.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


def uniform_rgb(value: int, height: int = 16, width: int = 16) -> PlanarImage:
    return from_rgb_array(np.full((height, width, 3), value, dtype=np.uint8))


@pytest.fixture
def random_rgb():
    return make_rgb


@pytest.fixture
def uniform_image():
    return uniform_rgb
