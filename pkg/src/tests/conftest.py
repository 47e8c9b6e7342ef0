# src/tests/conftest.py

import numpy as np
import pytest

from src.domain.configs import NetworkConfig, TrainConfig
from src.domain.cuboid import VideoCuboid


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run tests marked slow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="slow; pass --runslow to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


def moving_pattern(frames: int = 7, height: int = 64, width: int = 64, speed: float = 2.0) -> VideoCuboid:
    """Smooth sinusoidal texture translating `speed` pixels per frame along x."""
    t, y, x = np.meshgrid(np.arange(frames), np.arange(height), np.arange(width), indexing="ij")
    values = 127.5 + 60.0 * np.sin(2 * np.pi * (x - speed * t) / 16.0) * np.cos(2 * np.pi * y / 20.0)
    values += 30.0 * np.cos(2 * np.pi * (x + y - speed * t) / 24.0)
    return VideoCuboid(values)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def toy_cfg() -> NetworkConfig:
    return NetworkConfig.toy()


@pytest.fixture
def tiny_train_cfg() -> TrainConfig:
    """Toy network on 4x4 input patches (16x16 labels): a step takes well under a second."""
    return TrainConfig(
        batch_size=2,
        patch_size=4,
        clip_frames=7,
        crops_per_clip=2,
        max_epochs=2,
        seed=3,
        network=NetworkConfig.toy(),
    )


@pytest.fixture
def small_clip() -> VideoCuboid:
    return moving_pattern(frames=7, height=24, width=24)
