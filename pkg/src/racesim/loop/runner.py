"""Synchronous closed loop: sensors, estimator, controller, actuators, vehicle, track.

Every controller period the loop measures the true state, filters it,
computes steering and pedal commands, and integrates the vehicle over a
whole number of physics steps. Actuator dead times are delay lines clocked
at the physics step; the first-order lags are part of the vehicle state.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from .. import vehicle as vm
from ..driveline import DelayLine
from ..errors import ConfigurationError, IntegrationFault, ModelFault, OffTrackError
from ..integrator import DEFAULT_STEP
from ..metrics import max_lateral_error
from ..chassis import G
from ..tire import MF2006Parameters, linear_from_full
from ..track import DEFAULT_CORRIDOR, external_wrench, project
from .control import ControlContext, ControllerConfig, lateral_control, longitudinal_control, low_level
from .sensing import LowPassEstimator, SensorConfig, make_rng, sense


@dataclass(frozen=True)
class LoopConfig:
    controller: ControllerConfig = field(default_factory=ControllerConfig)
    sensors: SensorConfig = field(default_factory=SensorConfig)
    estimator_cutoff_hz: float = math.inf
    corridor: float = DEFAULT_CORRIDOR
    step: float = DEFAULT_STEP
    # a run is abandoned after timeout_factor times the reference lap time
    timeout_factor: float = 2.0
    keep_states: bool = False

    def __post_init__(self):
        ratio = self.controller.period / self.step
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ConfigurationError(
                f"controller period {self.controller.period} s is not a multiple of the step {self.step} s")

    @property
    def steps_per_tick(self):
        return int(round(self.controller.period / self.step))


@dataclass
class RunResult:
    run_id: int = 0
    variant: str = "base"
    scale: float = 1.0
    seed: int = 0
    completed: bool = False
    lap_time: float = math.nan
    d_max: float = math.nan
    disparity_baseline: float = math.nan
    disparity_reference: float = math.nan
    median_load: float = math.nan
    diagnostic: str = ""
    peak_lateral_accel: float = math.nan


@dataclass
class RunTrace:
    t: np.ndarray
    s: np.ndarray
    d: np.ndarray
    states: np.ndarray = None


def reference_lap_time(lap):
    v = np.maximum(0.5 * (lap.v[1:] + lap.v[:-1]), 1e-9)
    return float(np.sum(np.diff(lap.s) / v))


def controller_context(params):
    """Controller-side vehicle knowledge: wheelbase, understeer gradient, mass, drag."""
    c = params.chassis
    m = params.m_total
    L = c.wheelbase
    k_us = 0.0
    if isinstance(params.tire, MF2006Parameters):
        fz_f = m * G * c.l_r / L / 2.0
        fz_r = m * G * c.l_f / L / 2.0
        c_f = 2.0 * linear_from_full(params.tire, fz_f).c_alpha
        c_r = 2.0 * linear_from_full(params.tire, fz_r).c_alpha
        k_us = m / L * (c.l_r / c_f - c.l_f / c_r)
    return ControlContext(wheelbase=L, understeer_gradient=k_us, mass=m, drag=params.aero.drag)


def _truth(x, dx):
    ax = dx[vm.VX] - x[vm.WZ] * x[vm.VY]
    ay = dx[vm.VY] + x[vm.WZ] * x[vm.VX]
    return np.array([x[vm.X], x[vm.Y], x[vm.YAW], x[vm.VX], x[vm.VY], x[vm.WZ], ax, ay])


def run_closed_loop(params, lap, track, cfg=None, seed=0, controller_params=None,
                    variant="base", run_id=0, scale=1.0):
    """Drive one lap. Returns ``(RunTrace, RunResult)``; faults end the run
    as not completed and are described in ``RunResult.diagnostic``."""
    cfg = cfg or LoopConfig()
    result = RunResult(run_id=run_id, variant=str(variant), scale=scale, seed=seed)
    empty = RunTrace(np.zeros(0), np.zeros(0), np.zeros(0))
    if not np.max(lap.v) > 0:
        result.diagnostic = "reference speed is zero everywhere"
        return empty, result
    if abs(lap.s_max - track.s_max) > 1e-6 * track.s_max:
        raise ConfigurationError("reference lap and track lengths differ")

    ctx = controller_context(controller_params or params)
    ccfg = cfg.controller
    h = cfg.step
    n_sub = cfg.steps_per_tick
    pt = params.powertrain
    act = params.actuators
    bypass = params.bypass_actuators

    s0 = float(lap.s[0])
    x0, y0 = track.point_at(s0, float(lap.d[0]))
    try:
        x, u = vm.straight_line_trim(params, float(lap.v[0]), (x0, y0, float(track.heading_at(s0))))
    except ConfigurationError as exc:
        result.diagnostic = f"initialisation failed: {exc}"
        return empty, result
    gear = int(u[vm.U_GEAR])
    delays = [
        DelayLine(0 if bypass else round(act.steer_dead_time / h), u[vm.U_STEER]),
        DelayLine(0 if bypass else round(act.throttle_dead_time / h), u[vm.U_THROTTLE]),
        DelayLine(0 if bypass else round(act.brake_dead_time / h), u[vm.U_BRAKE]),
    ]
    base_args = params.pack()
    rng = make_rng(seed)
    estimator = LowPassEstimator(cfg.estimator_cutoff_hz, ccfg.period)
    ctx.hint_s = s0
    u_seq = np.empty((n_sub, vm.N_INPUT))

    t_max = cfg.timeout_factor * reference_lap_time(lap) + 10.0
    t = 0.0
    s_prev = s0
    progress = 0.0
    ts, ss, ds, states, loads = [], [], [], [], []
    dx = np.empty(vm.N_STATE)
    diag = np.empty(vm.N_DIAG)
    zero_ext = np.zeros(3)
    try:
        while True:
            pose = project((x[vm.X], x[vm.Y]), track, hint_s=s_prev, heading=x[vm.YAW], corridor=cfg.corridor)
            step = pose.s - s_prev
            if step < -0.5 * track.s_max:
                step += track.s_max
            elif step > 0.5 * track.s_max:
                step -= track.s_max
            progress += step
            s_prev = pose.s
            ts.append(t)
            ss.append(progress)
            ds.append(pose.d)
            loads.append(vm.wheel_loads(x, params))
            if cfg.keep_states:
                states.append(x.copy())
            if progress >= lap.s_max:
                # interpolate the crossing time between the last two ticks
                p0, p1 = ss[-2], ss[-1]
                result.lap_time = ts[-2] + (lap.s_max - p0) / (p1 - p0) * (ts[-1] - ts[-2])
                result.completed = True
                break
            if t > t_max:
                result.diagnostic = f"timeout after {t:.1f} s at s={progress:.0f} m"
                break

            vm.evaluate(x, u, base_args + (zero_ext,), dx, diag)
            est = estimator.update(sense(_truth(x, dx), cfg.sensors, rng))
            steer, est_pose = lateral_control(est, lap, track, ccfg, ctx, cfg.corridor)
            a_target = longitudinal_control(est, lap, ccfg, est_pose.s)
            cmd = low_level(a_target, est[3], pt, ctx.mass, ctx.drag, gear, ccfg.coast_band)
            gear = cmd.gear

            for k in range(n_sub):
                u_seq[k, 0] = delays[0].push(steer)
                u_seq[k, 1] = delays[1].push(cmd.throttle)
                u_seq[k, 2] = delays[2].push(cmd.brake)
                u_seq[k, 3] = gear
            ext = np.asarray(external_wrench(pose, x[vm.VX], params.m_total, track))
            x_new, failed, stage = vm.advance(x, u_seq, h, base_args + (ext,))
            if failed >= 0:
                raise IntegrationFault(stage, time=t + failed * h)
            x = x_new
            u = u_seq[-1].copy()
            if bypass:
                x[vm.STEER:vm.BRAKE + 1] = u[:3]
            if not np.all(np.isfinite(x)):
                raise ModelFault("non-finite state", state=x)
            t += ccfg.period
    except OffTrackError as exc:
        result.diagnostic = f"off track at s={progress:.0f} m: {exc}"
    except (IntegrationFault, ModelFault) as exc:
        result.diagnostic = f"model fault at s={progress:.0f} m: {exc}"

    trace = RunTrace(np.array(ts), np.array(ss), np.array(ds), np.array(states) if cfg.keep_states else None)
    if loads:
        result.median_load = float(np.median(np.concatenate(loads)))
    if result.completed:
        result.d_max = max_lateral_error(trace.d)
    return trace, result
