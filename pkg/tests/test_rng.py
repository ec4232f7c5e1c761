import numpy as np
import pytest

from core.exceptions import ConfigurationException
from core.rng import CounterRng


def test_same_seed_same_stream():
    a = CounterRng(99).raw(3, 50)
    b = CounterRng(99).raw(3, 50)
    np.testing.assert_array_equal(a, b)


def test_streams_and_seeds_are_distinct():
    rng = CounterRng(99)
    assert not np.array_equal(rng.raw(1, 16), rng.raw(2, 16))
    assert not np.array_equal(rng.raw(1, 16), CounterRng(100).raw(1, 16))


@pytest.mark.parametrize("offset", [0, 1, 3, 4, 5, 17])
def test_random_access_matches_serial_stream(offset):
    rng = CounterRng(2024)
    serial = rng.raw(7, offset + 20)
    np.testing.assert_array_equal(rng.raw(7, 20, offset=offset), serial[offset:])


def test_uniforms_in_unit_interval():
    u = CounterRng(5).uniforms(0, 20000)
    assert u.min() >= 0.0
    assert u.max() < 1.0
    assert abs(u.mean() - 0.5) < 0.01


def test_normals_moments():
    z = CounterRng(5).normals(1, 100000)
    assert np.all(np.isfinite(z))
    assert abs(z.mean()) < 0.02
    assert abs(z.std() - 1.0) < 0.02


def test_normals_random_access():
    rng = CounterRng(11)
    np.testing.assert_array_equal(rng.normals(4, 5, offset=9), rng.normals(4, 14)[9:])


def test_zero_count():
    assert CounterRng(1).raw(0, 0).size == 0


@pytest.mark.parametrize("seed", [-1, 2 ** 64])
def test_seed_out_of_range(seed):
    with pytest.raises(ConfigurationException):
        CounterRng(seed)


def test_negative_stream_rejected():
    with pytest.raises(ConfigurationException):
        CounterRng(1).raw(-1, 4)
