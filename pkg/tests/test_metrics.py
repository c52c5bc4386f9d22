import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from racesim.errors import MetricError
from racesim.metrics import disparity, max_lateral_error, mean_lateral_error, resample

finite = st.floats(-2.0, 2.0, allow_nan=False)


def test_resample_on_grid_is_identity():
    s = np.arange(0.0, 10.5, 0.5)
    d = np.sin(s)
    grid, out = resample(s, d, 10.0)
    assert np.array_equal(grid, s) and np.array_equal(out, d)


def test_resample_interpolates():
    grid, out = resample([0.0, 10.0], [0.0, 1.0], 10.0, spacing=5.0)
    assert out[1] == 0.5


def test_resample_idempotent():
    s = np.sort(np.random.default_rng(1).uniform(0, 100, 300))
    grid, once = resample(s, np.cos(s), 100.0)
    _, twice = resample(grid, once, 100.0)
    assert np.array_equal(once, twice)


def test_resample_clamps_ends():
    grid, out = resample([2.0, 8.0], [1.0, 3.0], 10.0, spacing=1.0)
    assert out[0] == 1.0 and out[-1] == 3.0


def test_resample_gap_fault():
    with pytest.raises(MetricError):
        resample([0.0, 50.0], [0.0, 0.0], 50.0, max_gap=20.0)
    with pytest.raises(MetricError):
        resample([], [], 10.0)
    with pytest.raises(MetricError):
        resample([0.0, 0.0], [1.0, 2.0], 10.0)


def test_max_lateral_error():
    assert max_lateral_error(np.zeros(5)) == 0.0
    assert max_lateral_error([0.1, -0.4, 0.2]) == 0.4
    with pytest.raises(MetricError):
        max_lateral_error([])


@settings(max_examples=100, deadline=None)
@given(arrays(float, st.integers(1, 200), elements=finite))
def test_max_is_brute_force_and_sign_blind(d):
    brute = max(abs(v) for v in d)
    assert max_lateral_error(d) == brute
    assert max_lateral_error(-d) == brute


def test_disparity_identical_traces():
    grid = np.linspace(0, 100, 201)
    d = np.sin(grid / 7)
    assert disparity(grid, d, grid, d) == 0.0


def test_disparity_zero_reference():
    grid = np.linspace(0, 100, 201)
    assert disparity(grid, np.sin(grid), grid, np.zeros_like(grid)) == 0.0


@pytest.mark.parametrize("s_max", [10.0, 333.5, 2000.0])
def test_disparity_constant_closed_form(s_max):
    grid = np.linspace(0, s_max, 101)
    assert disparity(grid, np.full(101, 0.3), grid, np.full(101, 0.5)) == pytest.approx(0.02, abs=1e-12)


def test_disparity_is_asymmetric():
    grid = np.linspace(0, 100, 201)
    a, b = 0.2 * np.sin(grid / 9), 0.5 * np.cos(grid / 5)
    assert disparity(grid, a, grid, b) != pytest.approx(disparity(grid, b, grid, a), rel=1e-3)


def test_disparity_grid_mismatch():
    with pytest.raises(MetricError):
        disparity(np.linspace(0, 1, 5), np.zeros(5), np.linspace(0, 1, 6), np.zeros(6))


def test_disparity_grid_convergence():
    s = np.linspace(0, 1000, 4001)
    d = 0.3 * np.sin(s / 40) + 0.1 * np.cos(s / 13)
    d_ref = 0.4 * np.sin(s / 40 + 0.2)
    values = [disparity(*resample(s, d, 1000, h), *resample(s, d_ref, 1000, h)) for h in (1.0, 0.5, 0.25)]
    assert values[0] == pytest.approx(values[2], rel=0.01)
    assert values[1] == pytest.approx(values[2], rel=0.01)


@settings(max_examples=100, deadline=None)
@given(arrays(float, 50, elements=finite), arrays(float, 50, elements=finite))
def test_disparity_non_negative(d, d_ref):
    grid = np.linspace(0, 49, 50)
    assert disparity(grid, d, grid, d_ref) >= 0.0


@settings(max_examples=100, deadline=None)
@given(arrays(float, 50, elements=finite), arrays(float, 50, elements=finite))
def test_disparity_zero_iff_agree_where_reference_nonzero(d, d_ref):
    grid = np.linspace(0, 49, 50)
    agree = np.where(d_ref != 0, d_ref, d)
    assert disparity(grid, agree, grid, d_ref) == 0.0


def test_mean_lateral_error():
    grid = np.linspace(0, 10, 11)
    assert mean_lateral_error(grid, np.full(11, -0.2)) == pytest.approx(0.2)
