import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlos_locate.geo import NoiseModel, Point2, as_stations, measure_ranges, true_range, true_ranges

coord = st.floats(-1e5, 1e5, allow_nan=False)
points = st.tuples(coord, coord)


@pytest.mark.parametrize("bs, ms, expected", [
    ((6000, 0), (2000, 1000), 4123.10563),
    ((2000, 1000), (2000, 1000), 0.0),
    ((0, 5000), (2000, 1000), 4472.13595),
])
def test_true_range_examples(bs, ms, expected):
    assert true_range(bs, ms) == pytest.approx(expected, abs=1e-5)


@given(points, points)
def test_true_range_symmetric_nonnegative(a, b):
    assert true_range(a, b) >= 0
    assert true_range(a, b) == true_range(b, a)


@given(points, points, points)
def test_triangle_inequality(a, b, c):
    assert true_range(a, c) <= true_range(a, b) + true_range(b, c) + 1e-9 * (1 + true_range(a, c))


def test_point_rejects_non_finite():
    with pytest.raises(ValueError):
        Point2(float("nan"), 0)
    with pytest.raises(ValueError):
        Point2(0, float("inf"))


def test_point_coercions():
    p = Point2.of([1, 2])
    assert p == Point2(1.0, 2.0)
    assert tuple(p) == (1.0, 2.0)
    np.testing.assert_array_equal(np.asarray(p), [1.0, 2.0])
    assert as_stations([Point2(0, 0), (1, 1)]).shape == (2, 2)


def test_noiseless_los_ranges_are_exact(stations, ms):
    r = measure_ranges(stations, ms, np.zeros(8), NoiseModel(0.0, 3))
    expected = [true_range(s, ms) for s in stations]
    np.testing.assert_allclose(r, expected, rtol=0, atol=1e-9)


def test_nlos_bias_is_added(stations, ms, exact_ranges):
    nl = np.zeros(8)
    nl[0] = 1000
    r = measure_ranges(stations, ms, nl, NoiseModel(0.0))
    assert r[0] == pytest.approx(5123.10563, abs=1e-5)
    np.testing.assert_array_equal(r[1:], exact_ranges[1:])


def test_measurement_is_deterministic(stations, ms):
    noise = NoiseModel(60.0, 1234)
    nl = [1000, 500, 0, 0, 0, 0, 0, 0]
    a = measure_ranges(stations, ms, nl, noise, trial_index=17)
    b = measure_ranges(stations, ms, nl, noise, trial_index=17)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, measure_ranges(stations, ms, nl, noise, trial_index=18))


def test_noise_keyed_per_station():
    noise = NoiseModel(1.0, 99)
    five, eight = noise.sample(4, 5), noise.sample(4, 8)
    np.testing.assert_array_equal(five, eight[:5])
    assert noise.standard_normal(4, 2) == eight[2]


def test_noise_standard_deviation():
    sigma = 60.0
    noise = NoiseModel(sigma, 2024)
    samples = np.array([noise.standard_normal(t, 0) for t in range(10_000)]) * sigma
    assert abs(samples.std() - sigma) < 0.05 * sigma
    assert abs(samples.mean()) < 3 * sigma / math.sqrt(len(samples))


def test_measured_ranges_clamped_at_zero():
    r = measure_ranges([(0, 0), (1, 0), (0, 1)], (0, 0), [0, 0, 0], NoiseModel(1000.0, 5))
    assert np.all(r >= 0)


def test_measure_ranges_errors(stations, ms):
    with pytest.raises(ValueError, match="length"):
        measure_ranges(stations, ms, [0, 0], NoiseModel())
    with pytest.raises(ValueError, match="non-negative"):
        measure_ranges(stations, ms, [-1] + [0] * 7, NoiseModel())


def test_noise_model_validation():
    with pytest.raises(ValueError):
        NoiseModel(-1.0)
    with pytest.raises(ValueError):
        NoiseModel(1.0, seed=-3)


@settings(max_examples=25)
@given(st.integers(0, 2**64 - 1), st.integers(0, 10**6))
def test_zero_sigma_has_no_noise(seed, trial):
    assert not NoiseModel(0.0, seed).sample(trial, 4).any()


def test_true_ranges_vector(stations, ms):
    np.testing.assert_allclose(true_ranges(stations, ms)[[0, 5]], [4123.10563, 4472.13595], atol=1e-5)
