"""Reference path-tracking controller and low-level longitudinal control.

This is a feedforward plus feedback tracker, deliberately simple and
deterministic. Lateral gains are scheduled with speed so that the lateral
error of a kinematic single-track car behaves like a second-order system with
natural frequency ``omega_n`` and damping ``zeta``. A yaw-rate term damps
the car's own yaw mode, which the path feedback alone excites on corner exit.
"""
import math
from dataclasses import dataclass

import numpy as np

from ..driveline import RPM_PER_RAD_S, engine_torque, gear_for_speed, throttle_for_torque
from ..track import project
from .sensing import VX, VY, X, Y, YAW, YAW_RATE


@dataclass(frozen=True)
class ControllerConfig:
    period: float = 9.6e-3
    omega_n: float = 2.0
    zeta: float = 1.3
    preview_time: float = 0.3
    understeer_feedforward: bool = True
    # steering per unit yaw-rate error against v * kappa, s
    k_yaw_rate: float = 0.1
    yaw_rate_preview_time: float = 0.1
    k_v: float = 1.0
    accel_preview_time: float = 0.1
    max_steer: float = 0.35
    max_accel: float = 15.0
    max_decel: float = 35.0
    min_speed: float = 5.0
    coast_band: float = 0.05

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError("controller period must be positive")
        if min(self.max_steer, self.max_accel, self.max_decel, self.min_speed) <= 0:
            raise ValueError("controller limits must be positive")
        if self.omega_n <= 0 or self.zeta <= 0 or self.k_v < 0 or self.k_yaw_rate < 0:
            raise ValueError("invalid controller gains")


@dataclass
class ControlContext:
    """Per-run quantities the controller derives once from the vehicle."""

    wheelbase: float
    understeer_gradient: float
    mass: float
    drag: float
    hint_s: float = 0.0


def understeer_gradient(params, stiffness):
    """Steady-state understeer gradient (rad per m/s^2) from axle cornering
    stiffnesses ``stiffness = (front, rear)`` in N/rad."""
    c = params.chassis
    m = params.m_total
    L = c.wheelbase
    return m / L * (c.l_r / stiffness[0] - c.l_f / stiffness[1])


def lateral_control(est, lap, track, cfg, ctx, corridor):
    """Steering target (road-wheel angle, rad). Positive steers left."""
    vx = est[VX]
    course = est[YAW] + math.atan2(est[VY], max(abs(vx), 1e-3))
    pose = project((est[X], est[Y]), track, hint_s=ctx.hint_s, heading=course, corridor=corridor)
    ctx.hint_s = pose.s
    v = max(vx, cfg.min_speed)
    d_target, _, _, _ = lap.at(pose.s)
    _, _, kappa_yaw, _ = lap.at(pose.s + v * cfg.yaw_rate_preview_time)
    _, _, kappa, _ = lap.at(pose.s + v * cfg.preview_time)
    L = ctx.wheelbase
    steer = math.atan(L * kappa)
    if cfg.understeer_feedforward:
        steer += ctx.understeer_gradient * v * v * kappa
    k_d = cfg.omega_n**2 * L / (v * v)
    k_chi = 2.0 * cfg.zeta * cfg.omega_n * L / v
    steer += k_d * (d_target - pose.d) - k_chi * pose.heading
    steer -= cfg.k_yaw_rate * (est[YAW_RATE] - v * kappa_yaw)
    return float(np.clip(steer, -cfg.max_steer, cfg.max_steer)), pose


def longitudinal_control(est, lap, cfg, s):
    """Target longitudinal acceleration (m/s^2)."""
    v = est[VX]
    _, v_ref, _, a_ref = lap.at(s + max(v, 0.0) * cfg.accel_preview_time)
    a = a_ref + cfg.k_v * (v_ref - v)
    return float(np.clip(a, -cfg.max_decel, cfg.max_accel))


@dataclass(frozen=True)
class PedalCommand:
    throttle: float
    brake: float
    gear: int


def low_level(a_target, v, powertrain, mass, drag, gear=None, coast_band=0.05):
    """Throttle, brake pressure and gear for a target acceleration.

    The wheel force demand is ``mass * a_target`` plus drag compensation.
    Demands inside the coast band give neither throttle nor brake. Positive
    demand is met with throttle by inverting the engine map in the selected
    gear; negative demand below what engine braking delivers uses the brakes.
    """
    v = max(v, 0.0)
    gear = gear_for_speed(v, powertrain, gear)
    force = mass * a_target + drag * v * v
    if abs(force) <= mass * coast_band:
        return PedalCommand(0.0, 0.0, gear)
    ratio = powertrain.ratio(gear)
    r = powertrain.wheel_radius
    rpm = v / r * ratio * RPM_PER_RAD_S
    emap = powertrain.engine_map
    engine_brake = engine_torque(rpm, 0.0, emap) * ratio / r
    if force >= engine_brake:
        thr = throttle_for_torque(force * r / ratio, rpm, emap)
        return PedalCommand(float(np.clip(thr, 0.0, 1.0)), 0.0, gear)
    if powertrain.brake_gain <= 0:
        return PedalCommand(0.0, 0.0, gear)
    return PedalCommand(0.0, -force * r / powertrain.brake_gain, gear)

