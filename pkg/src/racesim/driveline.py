"""Powertrain, brakes, wheel spin and actuator dynamics.

The driven rear axle uses a spool: both rear wheels share one speed. Engine
inertia is lumped into the rear axle, gear changes are instantaneous.
"""
import csv
import math
from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .errors import ConfigurationError

RPM_PER_RAD_S = 30.0 / math.pi
# Brake torque fades in linearly below this wheel speed so it never reverses spin.
BRAKE_SPEED_EPS = 0.5


@dataclass(frozen=True)
class EngineMap:
    """Torque table over engine speed (rows, rev/min) and throttle (columns)."""

    speeds: np.ndarray
    throttles: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        speeds = np.asarray(self.speeds, dtype=float)
        throttles = np.asarray(self.throttles, dtype=float)
        torque = np.asarray(self.torque, dtype=float)
        if speeds.size < 2 or throttles.size < 2:
            raise ConfigurationError("engine map needs at least two speeds and two throttle points")
        if torque.shape != (speeds.size, throttles.size):
            raise ConfigurationError(f"engine map shape {torque.shape} does not match its axes")
        if np.any(np.diff(speeds) <= 0) or np.any(np.diff(throttles) <= 0):
            raise ConfigurationError("engine map axes must be strictly increasing")
        if not np.all(np.isfinite(torque)):
            raise ConfigurationError("engine map contains non-finite values")
        if np.any(np.diff(torque, axis=1) < 0):
            raise ConfigurationError("engine torque must be non-decreasing in throttle")
        for name, v in (("speeds", speeds), ("throttles", throttles), ("torque", torque)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    def __eq__(self, other):
        return (isinstance(other, EngineMap) and np.array_equal(self.speeds, other.speeds)
                and np.array_equal(self.throttles, other.throttles)
                and np.array_equal(self.torque, other.torque))

    def __hash__(self):
        return hash((self.speeds.tobytes(), self.throttles.tobytes(), self.torque.tobytes()))

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
        try:
            throttles = [float(v) for v in rows[0][1:]]
            speeds = [float(r[0]) for r in rows[1:]]
            torque = [[float(v) for v in r[1:]] for r in rows[1:]]
        except (IndexError, ValueError) as exc:
            raise ConfigurationError(f"malformed engine map {path}: {exc}") from None
        return cls(np.array(speeds), np.array(throttles), np.array(torque))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["rpm"] + [repr(float(t)) for t in self.throttles])
            for s, row in zip(self.speeds, self.torque):
                w.writerow([repr(float(s))] + [repr(float(v)) for v in row])

    @property
    def max_speed(self):
        return float(self.speeds[-1])


@dataclass(frozen=True)
class PowertrainParameters:
    engine_map: EngineMap
    gear_ratios: tuple
    wheel_inertia: float
    engine_inertia: float
    wheel_radius: float
    brake_gain: float
    brake_balance: float
    upshift_rpm: float
    shift_hysteresis_rpm: float = 500.0

    def __post_init__(self):
        ratios = tuple(float(r) for r in self.gear_ratios)
        if not ratios or min(ratios) <= 0:
            raise ConfigurationError("gear ratios must be positive")
        object.__setattr__(self, "gear_ratios", ratios)
        if not self.wheel_radius > 0:
            raise ConfigurationError("wheel radius must be positive")
        if not self.wheel_inertia > 0 or self.engine_inertia < 0:
            raise ConfigurationError("invalid driveline inertia")
        if not 0.0 <= self.brake_balance <= 1.0:
            raise ConfigurationError("brake balance must lie in [0, 1]")
        if self.brake_gain < 0:
            raise ConfigurationError("brake gain must be non-negative")

    def ratio(self, gear):
        if not 1 <= gear <= len(self.gear_ratios):
            raise ConfigurationError(f"gear {gear} outside 1..{len(self.gear_ratios)}")
        return self.gear_ratios[gear - 1]

    def engine_speed(self, v, gear):
        """Engine speed in rev/min at vehicle speed ``v`` without slip."""
        return v / self.wheel_radius * self.ratio(gear) * RPM_PER_RAD_S


@dataclass(frozen=True)
class ActuatorParameters:
    steer_dead_time: float = 0.02
    steer_tau: float = 0.05
    throttle_dead_time: float = 0.03
    throttle_tau: float = 0.08
    brake_dead_time: float = 0.03
    brake_tau: float = 0.05

    def __post_init__(self):
        for ch in ("steer", "throttle", "brake"):
            if getattr(self, f"{ch}_dead_time") < 0 or not getattr(self, f"{ch}_tau") > 0:
                raise ConfigurationError(f"invalid {ch} actuator constants")


@dataclass(frozen=True)
class ActuationCommand:
    steering: float = 0.0
    throttle: float = 0.0
    brake: float = 0.0
    gear: int = 1

    def __post_init__(self):
        if not 0.0 <= self.throttle <= 1.0:
            raise ValueError("throttle must lie in [0, 1]")
        if self.brake < 0:
            raise ValueError("brake pressure must be non-negative")


# --------------------------------------------------------------------------
# engine and gearbox


@njit(cache=True)
def _bracket(axis, x):
    n = axis.shape[0]
    if x <= axis[0]:
        return 0, 0.0
    if x >= axis[n - 1]:
        return n - 2, 1.0
    i = np.searchsorted(axis, x, side="right") - 1
    return i, (x - axis[i]) / (axis[i + 1] - axis[i])


@njit(cache=True)
def interp2(speeds, throttles, table, rpm, throttle):
    i, a = _bracket(speeds, rpm)
    j, b = _bracket(throttles, throttle)
    return ((1.0 - a) * ((1.0 - b) * table[i, j] + b * table[i, j + 1])
            + a * ((1.0 - b) * table[i + 1, j] + b * table[i + 1, j + 1]))


def engine_torque(engine_speed, throttle, emap):
    """Bilinear map lookup, clamped at the table edges."""
    return interp2(emap.speeds, emap.throttles, emap.torque, engine_speed, throttle)


def throttle_for_torque(torque, engine_speed, emap):
    """Invert the map along throttle at fixed engine speed, clamped to [0, 1]."""
    column = np.array([engine_torque(engine_speed, t, emap) for t in emap.throttles])
    if torque <= column[0]:
        return float(emap.throttles[0])
    if torque >= column[-1]:
        return float(emap.throttles[-1])
    # the map is monotone in throttle; flat stretches resolve to the lowest throttle
    k = int(np.searchsorted(column, torque, side="left"))
    lo, hi = column[k - 1], column[k]
    t0, t1 = emap.throttles[k - 1], emap.throttles[k]
    return float(t0 + (t1 - t0) * (torque - lo) / (hi - lo))


def gear_for_speed(v, p, current=None):
    """Lowest gear whose engine speed stays below the upshift threshold.

    With a ``current`` gear, downshifts wait until the lower gear's engine
    speed has dropped below ``upshift_rpm - shift_hysteresis_rpm``.
    """
    n = len(p.gear_ratios)
    target = n
    for g in range(1, n + 1):
        if p.engine_speed(max(v, 0.0), g) < p.upshift_rpm:
            target = g
            break
    if current is None or target >= current:
        return target
    g = current
    while g > target and p.engine_speed(max(v, 0.0), g - 1) < p.upshift_rpm - p.shift_hysteresis_rpm:
        g -= 1
    return g


# --------------------------------------------------------------------------
# wheel spin


@njit(cache=True)
def _brake_torque(torque, omega):
    s = omega / BRAKE_SPEED_EPS
    if s > 1.0:
        s = 1.0
    elif s < -1.0:
        s = -1.0
    return torque * s


@njit(cache=True)
def wheel_spin_kernel(omega, ratio, throttle, brake, fxw, speeds, throttles, table,
                      wheel_inertia, engine_inertia, radius, brake_gain, balance, out):
    rpm = abs(omega[2]) * ratio * RPM_PER_RAD_S
    t_drive = interp2(speeds, throttles, table, rpm, throttle) * ratio
    tb_front = 0.5 * brake * brake_gain * balance
    tb_rear = 0.5 * brake * brake_gain * (1.0 - balance)
    for i in range(2):
        out[i] = (-_brake_torque(tb_front, omega[i]) - fxw[i] * radius) / wheel_inertia
    # spool: one shared rear speed, so both rear derivatives are the same number
    i_rear = 2.0 * wheel_inertia + engine_inertia * ratio * ratio
    rear = (t_drive - _brake_torque(tb_rear, omega[2]) - _brake_torque(tb_rear, omega[3])
            - (fxw[2] + fxw[3]) * radius) / i_rear
    out[2] = rear
    out[3] = rear


def wheel_spin_derivatives(omega, gear, throttle, brake, fxw, p):
    out = np.empty(4)
    emap = p.engine_map
    wheel_spin_kernel(np.asarray(omega, dtype=float), p.ratio(gear), throttle, brake,
                      np.asarray(fxw, dtype=float), emap.speeds, emap.throttles, emap.torque,
                      p.wheel_inertia, p.engine_inertia, p.wheel_radius, p.brake_gain,
                      p.brake_balance, out)
    return out


# --------------------------------------------------------------------------
# actuators


class DelayLine:
    """Pure dead time of ``n`` samples. The first ``n`` outputs are ``initial``."""

    def __init__(self, n, initial=0.0):
        self.n = int(n)
        self._buf = deque([initial] * self.n)

    def push(self, value):
        if self.n == 0:
            return value
        self._buf.append(value)
        return self._buf.popleft()


class FirstOrderDeadTime:
    """Dead time followed by a first-order lag, exact for held inputs.

    ``bypass`` turns the channel into an ideal actuator.
    """

    def __init__(self, dead_time, tau, dt, value=0.0, bypass=False):
        if dead_time < 0 or not tau > 0 or not dt > 0:
            raise ConfigurationError("invalid actuator constants")
        self.dead_time = dead_time
        self.tau = tau
        self.dt = dt
        self.value = value
        self.bypass = bypass
        self._line = DelayLine(round(dead_time / dt), value)
        self._gain = 1.0 - math.exp(-dt / tau)

    def step(self, target):
        if self.bypass:
            self.value = target
            return self.value
        delayed = self._line.push(target)
        self.value += self._gain * (delayed - self.value)
        return self.value


class SteeringActuator(FirstOrderDeadTime):
    @property
    def angle(self):
        return self.value


def steering_step(act, target, dt):
    """Advance the steering actuator by ``dt`` (must match its sample time)."""
    if not math.isclose(dt, act.dt):
        raise ValueError("actuator was built for a different sample time")
    act.step(target)
    return act


def pedal_lag_step(act, target, dt):
    if not math.isclose(dt, act.dt):
        raise ValueError("actuator was built for a different sample time")
    act.step(target)
    return act
