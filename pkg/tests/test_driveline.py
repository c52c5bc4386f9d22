import dataclasses
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from racesim import driveline as dl
from racesim.errors import ConfigurationError
from racesim.vehicle import default_vehicle

PT = default_vehicle().powertrain
EMAP = PT.engine_map


def test_grid_nodes_exact():
    for i, rpm in enumerate(EMAP.speeds):
        for j, thr in enumerate(EMAP.throttles):
            assert dl.engine_torque(rpm, thr, EMAP) == EMAP.torque[i, j]


def test_cell_midpoint_is_corner_mean():
    rpm = 0.5 * (EMAP.speeds[2] + EMAP.speeds[3])
    thr = 0.5 * (EMAP.throttles[1] + EMAP.throttles[2])
    corners = EMAP.torque[2:4, 1:3]
    assert dl.engine_torque(rpm, thr, EMAP) == pytest.approx(corners.mean(), rel=1e-12)


def test_zero_throttle_row_is_engine_braking():
    for rpm in EMAP.speeds:
        assert dl.engine_torque(rpm, 0.0, EMAP) <= 0.0


def test_clamped_outside_map():
    assert dl.engine_torque(-100.0, 1.0, EMAP) == EMAP.torque[0, -1]
    assert dl.engine_torque(1e6, 1.0, EMAP) == EMAP.torque[-1, -1]


@pytest.mark.parametrize("bad", [
    dict(speeds=[1000.0], throttles=[0.0, 1.0], torque=[[0.0, 1.0]]),
    dict(speeds=[1000.0, 2000.0], throttles=[0.0, 1.0], torque=[[0.0, 1.0]]),
    dict(speeds=[2000.0, 1000.0], throttles=[0.0, 1.0], torque=[[0.0, 1.0], [0.0, 1.0]]),
    dict(speeds=[1000.0, 2000.0], throttles=[0.0, 1.0], torque=[[1.0, 0.0], [0.0, 1.0]]),
])
def test_malformed_map(bad):
    with pytest.raises(ConfigurationError):
        dl.EngineMap(**{k: np.array(v) for k, v in bad.items()})


def test_engine_map_csv_round_trip(tmp_path):
    EMAP.to_csv(tmp_path / "map.csv")
    back = dl.EngineMap.from_csv(tmp_path / "map.csv")
    assert np.array_equal(back.torque, EMAP.torque) and np.array_equal(back.speeds, EMAP.speeds)


@settings(max_examples=60, deadline=None)
@given(st.floats(1000, 9000), st.floats(0.05, 1.0))
def test_throttle_inversion(rpm, thr):
    torque = dl.engine_torque(rpm, thr, EMAP)
    back = dl.throttle_for_torque(torque, rpm, EMAP)
    assert dl.engine_torque(rpm, back, EMAP) == pytest.approx(torque, abs=1e-6)


def test_steering_step_response():
    dt = 1e-4
    act = dl.SteeringActuator(0.02, 0.05, dt)
    for _ in range(round(0.07 / dt)):
        dl.steering_step(act, 0.1, dt)
    assert act.angle == pytest.approx(0.1 * (1 - math.exp(-1)), rel=0.01)


def test_steering_steady_state():
    dt = 1e-3
    act = dl.SteeringActuator(0.02, 0.05, dt)
    for _ in range(3000):
        dl.steering_step(act, 0.2, dt)
    assert act.angle == pytest.approx(0.2, abs=1e-6)


def test_steering_bypass_tracks_exactly():
    act = dl.SteeringActuator(0.02, 0.05, 1e-3, bypass=True)
    for target in (0.1, -0.3, 0.05):
        assert dl.steering_step(act, target, 1e-3).angle == target


def test_step_size_mismatch():
    with pytest.raises(ValueError):
        dl.steering_step(dl.SteeringActuator(0.02, 0.05, 1e-3), 0.1, 2e-3)


def test_pedal_zero_target_stays_zero():
    act = dl.FirstOrderDeadTime(0.03, 0.08, 1e-3)
    for _ in range(100):
        dl.pedal_lag_step(act, 0.0, 1e-3)
    assert act.value == 0.0


def test_pedal_reaches_63_percent_after_tau():
    dt = 1e-4
    act = dl.FirstOrderDeadTime(0.03, 0.08, dt)
    for _ in range(round(0.11 / dt)):
        dl.pedal_lag_step(act, 1.0, dt)
    assert act.value == pytest.approx(1 - math.exp(-1), rel=0.01)


def test_pedal_bypass():
    act = dl.FirstOrderDeadTime(0.03, 0.08, 1e-3, bypass=True)
    assert dl.pedal_lag_step(act, 0.7, 1e-3).value == 0.7


@settings(max_examples=40, deadline=None)
@given(st.floats(0.0, 0.1), st.integers(1, 50))
def test_dead_time_exactness(dead, k_cmd):
    dt = 1e-3
    act = dl.FirstOrderDeadTime(dead, 0.05, dt)
    n_dead = round(dead / dt)
    out = [act.step(0.0) for _ in range(k_cmd)]
    out += [act.step(1.0) for _ in range(n_dead + 5)]
    assert all(v == 0.0 for v in out[:k_cmd + n_dead])
    assert out[k_cmd + n_dead] > 0.0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=2, max_size=60))
def test_monotone_command_gives_monotone_output(cmds):
    act = dl.FirstOrderDeadTime(0.01, 0.05, 1e-3)
    out = [act.step(c) for c in sorted(cmds)]
    assert all(b >= a for a, b in zip(out, out[1:]))


def test_free_wheels_do_not_accelerate():
    ptz = dataclasses.replace(PT, engine_map=dl.EngineMap(EMAP.speeds, EMAP.throttles,
                                                          np.zeros_like(EMAP.torque)))
    assert dl.wheel_spin_derivatives([50.0] * 4, 3, 0.0, 0.0, [0.0] * 4, ptz).tolist() == [0, 0, 0, 0]


def test_brake_torque_on_front_wheel():
    # 1000 N m on one front wheel: pressure * gain * balance / 2 = 1000
    pt = dataclasses.replace(PT, wheel_inertia=2.0, brake_gain=100.0, brake_balance=1.0)
    acc = dl.wheel_spin_derivatives([50.0] * 4, 3, 0.0, 20.0, [0.0] * 4, pt)
    assert acc[0] == pytest.approx(-500.0) and acc[1] == pytest.approx(-500.0)


def test_brake_never_drives_a_stopped_wheel():
    acc = dl.wheel_spin_derivatives([0.0] * 4, 1, 0.0, 50.0, [0.0] * 4,
                                    dataclasses.replace(PT, engine_map=dl.EngineMap(
                                        EMAP.speeds, EMAP.throttles, np.zeros_like(EMAP.torque))))
    assert acc.tolist() == [0, 0, 0, 0]


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-10, 200), min_size=4, max_size=4), st.integers(1, 6), st.floats(0, 1),
       st.floats(0, 50), st.lists(st.floats(-5000, 5000), min_size=4, max_size=4))
def test_spool_rear_derivatives_equal(omega, gear, thr, brake, fxw):
    omega[3] = omega[2]
    acc = dl.wheel_spin_derivatives(omega, gear, thr, brake, fxw, PT)
    assert acc[2] == acc[3]


def test_gear_at_standstill():
    assert dl.gear_for_speed(0.0, PT) == 1


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 90), st.floats(0, 90))
def test_gear_monotone_in_speed(a, b):
    lo, hi = sorted((a, b))
    assert dl.gear_for_speed(lo, PT) <= dl.gear_for_speed(hi, PT)


def test_shift_threshold_and_hysteresis():
    g = 2
    v_up = PT.upshift_rpm / (PT.ratio(g) * dl.RPM_PER_RAD_S) * PT.wheel_radius
    assert dl.gear_for_speed(v_up, PT) == g + 1
    assert dl.gear_for_speed(v_up * (1 - 1e-9), PT) == g
    # from gear 3, stay until gear 2's engine speed falls below upshift - hysteresis
    v_low = (PT.upshift_rpm - PT.shift_hysteresis_rpm) / (PT.ratio(g) * dl.RPM_PER_RAD_S) * PT.wheel_radius
    assert dl.gear_for_speed(v_low * 1.001, PT, current=g + 1) == g + 1
    assert dl.gear_for_speed(v_low * 0.999, PT, current=g + 1) == g


def test_invalid_gear():
    with pytest.raises(ConfigurationError):
        PT.ratio(0)
