import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from racesim import generate as gen
from racesim.errors import GenerationError

FLAT_OVAL = gen.GeneratorSpec(kind="oval", straight=400.0, radius=200.0, bank_turn=0.0, transition=0.0)


def test_oval_length():
    track = gen.generate_track(FLAT_OVAL)
    assert track.s_max == pytest.approx(800 + 400 * math.pi, rel=1e-3)


def test_oval_length_with_transitions():
    track = gen.generate_track(dataclasses.replace(FLAT_OVAL, transition=40.0))
    # each clothoid pair lengthens a corner by the transition length
    assert track.s_max == pytest.approx(800 + 400 * math.pi + 2 * 40.0, rel=1e-3)


def test_zero_bank():
    assert np.all(gen.generate_track(FLAT_OVAL).bank == 0.0)


@pytest.mark.parametrize("spec", [gen.OVAL, gen.ROAD_COURSE])
def test_closure_and_sampling(spec):
    track = gen.generate_track(spec)
    assert math.hypot(track.x[-1] - track.x[0], track.y[-1] - track.y[0]) <= 1e-6
    assert np.max(np.diff(track.s)) <= 2.0
    assert track.curvature_consistency() < 0.05
    assert track.closed


def test_oval_has_two_bank_levels():
    track = gen.generate_track(gen.OVAL)
    assert track.bank.min() == 0.0 and track.bank.max() == pytest.approx(0.1)


def test_deterministic():
    a = gen.generate_track(gen.ROAD_COURSE)
    b = gen.generate_track(gen.ROAD_COURSE)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.y, b.y)


def test_shipped_files_match_generator(road_course, oval):
    for spec, (shipped, _) in ((gen.ROAD_COURSE, road_course), (gen.OVAL, oval)):
        fresh = gen.generate_track(spec)
        assert np.allclose(fresh.x, shipped.x, atol=1e-9) and np.allclose(fresh.y, shipped.y, atol=1e-9)


def test_overlap_rejected():
    spec = gen.GeneratorSpec(kind="road_course",
                             corners=(gen.Corner(50, math.radians(270)), gen.Corner(50, math.radians(90))),
                             straights=(100.0, 100.0))
    with pytest.raises(GenerationError):
        gen.generate_track(spec)


@pytest.mark.parametrize("bad", [dict(kind="figure8"), dict(kind="oval", radius=-1.0),
                                 dict(kind="oval", spacing=3.0), dict(kind="road_course")])
def test_invalid_spec(bad):
    with pytest.raises(GenerationError):
        gen.GeneratorSpec(**bad)


@pytest.fixture(scope="module")
def no_lift(base_vehicle):
    return dataclasses.replace(base_vehicle, aero=dataclasses.replace(base_vehicle.aero, lift=0.0))


def test_quarter_fraction_halves_corner_speed(no_lift):
    track = gen.generate_track(FLAT_OVAL)
    apex = int(np.argmax(np.abs(track.curvature)))
    full = gen.generate_lap(track, no_lift, 1.0, v_max=200.0)
    quarter = gen.generate_lap(track, no_lift, 0.25, v_max=200.0)
    assert quarter.v[apex] == pytest.approx(0.5 * full.v[apex], rel=1e-9)


def test_straights_at_cap(base_vehicle):
    spec = dataclasses.replace(FLAT_OVAL, straight=3000.0)
    track = gen.generate_track(spec)
    lap = gen.generate_lap(track, base_vehicle, 0.6, v_max=60.0)
    mid = np.argmin(np.abs(track.s - 1500.0))
    assert lap.v[mid] == 60.0
    free = gen.generate_lap(track, base_vehicle, 0.6)
    assert free.v.max() <= gen.top_speed(base_vehicle)


@pytest.mark.parametrize("fraction", [0.3, 0.6, 1.0])
def test_lateral_acceleration_within_budget(base_vehicle, fraction):
    track = gen.generate_track(gen.ROAD_COURSE)
    lap = gen.generate_lap(track, base_vehicle, fraction)
    mu_y, _ = gen.peak_friction(base_vehicle.tire, base_vehicle.m_total * 9.81 / 4)
    budget = fraction * mu_y * (9.81 + abs(base_vehicle.aero.lift) * lap.v**2 / base_vehicle.m_total)
    assert np.all(lap.v**2 * np.abs(lap.curvature) <= budget * 1.02)


def test_lap_deterministic_and_closed(base_vehicle):
    track = gen.generate_track(gen.OVAL)
    a = gen.generate_lap(track, base_vehicle, 0.6)
    b = gen.generate_lap(track, base_vehicle, 0.6)
    assert np.array_equal(a.v, b.v) and a.v[0] == a.v[-1]


@settings(max_examples=15, deadline=None)
@given(st.floats(-2.0, 2.0))
def test_bad_fraction(f):
    if 0 < f <= 1:
        return
    track = gen.generate_track(FLAT_OVAL)
    with pytest.raises(GenerationError):
        gen.generate_lap(track, gen_vehicle(), f)


def gen_vehicle():
    from racesim.vehicle import default_vehicle
    return default_vehicle()


@settings(max_examples=10, deadline=None)
@given(st.floats(60, 300), st.floats(50, 500), st.floats(0.0, 0.15))
def test_random_ovals_close(radius, straight, bank):
    track = gen.generate_track(gen.GeneratorSpec(kind="oval", straight=straight, radius=radius, bank_turn=bank))
    assert math.hypot(track.x[-1] - track.x[0], track.y[-1] - track.y[0]) <= 1e-6
    assert track.curvature_consistency() < 0.05
