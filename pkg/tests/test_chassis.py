import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from racesim import chassis as ch
from racesim.errors import ModelFault
from racesim.vehicle import default_vehicle

BASE = default_vehicle()
P = BASE.chassis
SUSP = BASE.suspension
ZERO4 = np.zeros(4)
NO_AERO = (0.0, 0.0, 0.0)
NO_EXT = (0.0, 0.0, 0.0)


def test_spring_damper():
    assert ch.spring_damper_forces(0.0, 0.0, 2e5, 8000.0) == (0.0, 0.0)
    f_s, f_d = ch.spring_damper_forces(0.02, -0.1, 2e5, 8000.0)
    assert f_s == pytest.approx(4000.0) and f_d == pytest.approx(-800.0)


def test_antiroll():
    assert ch.antiroll_forces([0.01, 0.01, -0.02, -0.02], 5e4, 5e4).tolist() == [0, 0, 0, 0]
    f = ch.antiroll_forces([0.0, 0.02, 0.0, 0.0], 5e4, 2e4)
    assert f[0] == pytest.approx(1000.0) and f[1] == pytest.approx(-1000.0)
    assert f[2] == f[3] == 0.0


def test_axle_geometry():
    p = dataclasses.replace(P, h_rp=0.05, b_f=1.6)
    assert ch.axle_geometry_forces(ZERO4, ZERO4, p, True).tolist() == [0, 0, 0, 0]
    f = ch.axle_geometry_forces(ZERO4, [1000.0, 0, 0, 0], p, True)
    assert f[0] == pytest.approx(62.5)
    f = ch.axle_geometry_forces(ZERO4, [1000.0, 1000.0, 0, 0], p, False)
    assert f[0] == -f[1]


def test_axle_geometry_zero_track_width():
    p = dataclasses.replace(P, b_f=0.0, b_r=0.0)
    f = ch.axle_geometry_forces(ZERO4, [1000.0] * 4, p, True)
    assert f.tolist() == [0, 0, 0, 0]


def test_composite_sum():
    assert ch.composite_suspension_force(0, 0, 0, 0) == 0
    assert ch.composite_suspension_force(4000, -800, 1000, 62.5) == pytest.approx(4262.5)


def _static_fc():
    return np.full(4, -P.m * ch.G / 4)


def test_standstill_equilibrium():
    acc = ch.body_derivatives(np.zeros(6), _static_fc(), ZERO4, ZERO4, NO_AERO, NO_EXT, P, SUSP)
    assert np.max(np.abs(acc)) < 1e-9


def test_symmetric_braking_no_yaw_or_roll():
    fx = np.array([-3000.0, -3000.0, -2000.0, -2000.0])
    acc = ch.body_derivatives(np.zeros(6), _static_fc(), fx, ZERO4, NO_AERO, NO_EXT, P, SUSP)
    assert acc[3] == pytest.approx(0.0, abs=1e-12)
    assert acc[5] == pytest.approx(0.0, abs=1e-12)
    assert acc[0] < 0


def test_lateral_force_balance():
    p = dataclasses.replace(P, m=1000.0 - sum(SUSP.unsprung_mass))
    acc = ch.body_derivatives(np.zeros(6), _static_fc(), ZERO4, np.full(4, 3500.0), NO_AERO, NO_EXT, p, SUSP)
    assert acc[1] == pytest.approx(14.0, rel=1e-12)


def test_non_finite_input_faults():
    with pytest.raises(ModelFault):
        ch.body_derivatives(np.zeros(6), _static_fc(), [np.nan, 0, 0, 0], ZERO4, NO_AERO, NO_EXT, P, SUSP)


def test_static_loads():
    p = dataclasses.replace(P, l_f=1.5, l_r=1.5)
    assert ch.static_wheel_loads(p, 1000.0).tolist() == pytest.approx([2452.5] * 4)
    p = dataclasses.replace(P, l_f=1.7, l_r=1.3)
    loads = ch.static_wheel_loads(p, 1000.0)
    assert loads[0] + loads[1] == pytest.approx(4251.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(100, 3000), st.floats(0.5, 2.5), st.floats(0.5, 2.5), st.floats(0, 5000))
def test_static_loads_balance(m, l_f, l_r, down):
    p = dataclasses.replace(P, l_f=l_f, l_r=l_r)
    loads = ch.static_wheel_loads(p, m, down)
    assert loads.sum() == pytest.approx(m * ch.G + down)
    assert (loads[0] + loads[1]) * l_f == pytest.approx((loads[2] + loads[3]) * l_r)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-5000, 5000), min_size=4, max_size=4))
def test_mirrored_lateral_forces_mirror_response(fy):
    """Swapping left and right with flipped signs flips lateral, roll and yaw responses."""
    fy = np.array(fy)
    mirror = -fy[[1, 0, 3, 2]]
    a = ch.body_derivatives(np.zeros(6), _static_fc(), ZERO4, fy, NO_AERO, NO_EXT, P, SUSP)
    b = ch.body_derivatives(np.zeros(6), _static_fc(), ZERO4, mirror, NO_AERO, NO_EXT, P, SUSP)
    assert b[1] == pytest.approx(-a[1], abs=1e-9)
    assert b[3] == pytest.approx(-a[3], abs=1e-6)
    assert b[5] == pytest.approx(-a[5], abs=1e-6)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-0.1, 0.1), min_size=4, max_size=4), st.floats(0, 1e5), st.floats(0, 1e5))
def test_antiroll_forces_sum_to_zero(z, kf, kr):
    assert ch.antiroll_forces(z, kf, kr).sum() == pytest.approx(0.0, abs=1e-6)
