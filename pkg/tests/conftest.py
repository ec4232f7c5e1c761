"""Shared fixtures: small deterministic sequences and configs."""
import numpy as np
import pytest

from config import settings
from core.frames import FrameSequence
from synthesis.fields import OpticalSystem, SynthesisConfig, TauField


@pytest.fixture(autouse=True)
def small_pools(monkeypatch):
    """Keep thread pools and bands small so band stitching is exercised."""
    monkeypatch.setattr(settings, "workers", 2)
    monkeypatch.setattr(settings, "row_band", 5)
    monkeypatch.setattr(settings, "frame_chunk", 3)


@pytest.fixture
def random_frames():
    return np.random.default_rng(1234).integers(0, 256, size=(24, 12, 10), dtype=np.uint8)


@pytest.fixture
def random_sequence(random_frames):
    return FrameSequence(random_frames)


def make_config(nx=16, ny=16, n_frames=6, tau=5.0, seed=42, **kwargs) -> SynthesisConfig:
    return SynthesisConfig(
        nx=nx,
        ny=ny,
        n_frames=n_frames,
        tau_field=TauField.constant(nx, ny, tau),
        optics=kwargs.pop("optics", OpticalSystem.preset("high_contrast")),
        seed=seed,
        **kwargs,
    )


@pytest.fixture
def small_config():
    return make_config()
