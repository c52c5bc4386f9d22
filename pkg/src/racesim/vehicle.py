"""Assembled vehicle model ``dx/dt = f(x, u)`` and the model-variant factory.

State map (35 entries, 14 degrees of freedom)::

    0-5    X, Y, z, roll, pitch, yaw          body pose (X, Y world plane)
    6-11   vx, vy, vz, p, q, r                body velocities and rates, body axes
    12-15  wheel heave, fl fr rl rr           wheel centre height above touchdown
    16-19  wheel heave rate
    20-23  wheel spin speed                   rad/s
    24-27  transient slip ratio
    28-31  transient slip angle
    32     steering angle                      road-wheel angle, rad
    33     throttle                            0..1
    34     brake pressure

Inputs ``u`` are ``(steering target, throttle, brake pressure, gear)`` after
the actuator dead times. The external ``(Fx, Fy, Fz)`` force from the track
enters through the kernel argument tuple.
"""
import enum
import json
import math
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np
from numba import njit
from scipy import optimize

from . import tire as tm
from .aero import AeroParameters, aero_kernel
from .chassis import (
    G,
    ChassisParameters,
    WheelSuspension,
    antiroll_kernel,
    axle_geometry_kernel,
    body_kernel,
    static_wheel_loads,
)
from .driveline import (
    ActuatorParameters,
    EngineMap,
    PowertrainParameters,
    gear_for_speed,
    wheel_spin_kernel,
)
from .errors import ConfigurationError, ModelFault
from .integrator import dp45_step_jit

SCHEMA_VERSION = 1

N_STATE = 35
X, Y, Z, ROLL, PITCH, YAW = range(6)
VX, VY, VZ, WX, WY, WZ = range(6, 12)
ZU, VZU, OMEGA, KAPPA, ALPHA = 12, 16, 20, 24, 28
STEER, THROTTLE, BRAKE = 32, 33, 34
N_INPUT = 4
U_STEER, U_THROTTLE, U_BRAKE, U_GEAR = range(4)

PARAM_NAMES = (
    "m_s", "m_u0", "m_u1", "m_u2", "m_u3", "i_xx", "i_yy", "i_zz",
    "l_f", "l_r", "b_f", "b_r", "h_cog", "h_rp", "h_pp_accel", "h_pp_decel",
    "k_s0", "k_s1", "k_s2", "k_s3", "k_d0", "k_d1", "k_d2", "k_d3", "k_ar_f", "k_ar_r",
    "k_t", "r0", "sigma_kappa", "sigma_alpha", "tire_model",
    "drag", "lift", "l_aero",
    "i_wheel", "i_engine", "r_wheel", "brake_gain", "brake_balance",
    "tau_steer", "tau_throttle", "tau_brake", "bypass",
    "m_total", "x_s", "y_s",
)
(
    P_MS, P_MU, _MU1, _MU2, _MU3, P_IXX, P_IYY, P_IZZ,
    P_LF, P_LR, P_BF, P_BR, P_HCOG, P_HRP, P_HPPA, P_HPPD,
    P_KS, _KS1, _KS2, _KS3, P_KD, _KD1, _KD2, _KD3, P_KARF, P_KARR,
    P_KT, P_R0, P_SIGK, P_SIGA, P_TIRE,
    P_DRAG, P_LIFT, P_LAERO,
    P_IW, P_IE, P_RW, P_BGAIN, P_BBAL,
    P_TAUS, P_TAUT, P_TAUB, P_BYPASS,
    P_MTOT, P_XS, P_YS,
) = range(len(PARAM_NAMES))

# diagnostic channel blocks, four wheels each
D_FZ, D_ALPHA, D_KAPPA, D_FXW, D_FYW, D_FX, D_FY, D_FC = (4 * k for k in range(8))
N_DIAG = 32

SLIP_SPEED_FLOOR = 1.0


class ModelVariant(str, enum.Enum):
    BASE = "base"
    MF_SIMPLE = "mf_simple"
    LINEAR_TIRES = "linear_tires"
    COG0 = "cog0"
    SINGLE_TRACK_COG0 = "single_track_cog0"
    NO_DELAY = "no_delay"
    LESS_GRIP = "less_grip"
    LESS_LIFT = "less_lift"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        value = _ALIASES.get(value, value)
        try:
            return cls(value)
        except ValueError:
            raise ConfigurationError(f"unknown model variant {value!r}") from None


_ALIASES = {"baseline": "base", "no_actuation_delay": "no_delay", "less_downforce": "less_lift"}


@dataclass(frozen=True)
class VehicleParameters:
    chassis: ChassisParameters
    suspension: WheelSuspension
    tire: object
    tire_vertical: tm.TireVertical
    relaxation: tm.RelaxationLengths
    aero: AeroParameters
    powertrain: PowertrainParameters
    actuators: ActuatorParameters
    zero_track_width: bool = False
    zero_cog_height: bool = False
    bypass_actuators: bool = False

    def __post_init__(self):
        if not isinstance(self.tire, (tm.MF2006Parameters, tm.MFSimpleParameters, tm.LinearTireParameters)):
            raise ConfigurationError(f"unsupported tire parameter type {type(self.tire).__name__}")
        c = self.chassis
        if self.zero_track_width and (c.b_f != 0 or c.b_r != 0):
            raise ConfigurationError("zero_track_width flag set but track widths are non-zero")
        if self.zero_cog_height and (c.h_cog != 0 or c.h_rp != 0 or c.h_pp_accel != 0 or c.h_pp_decel != 0):
            raise ConfigurationError("zero_cog_height flag set but heights are non-zero")

    @property
    def m_total(self):
        return self.chassis.m + sum(self.suspension.unsprung_mass)

    @property
    def tire_model(self):
        if isinstance(self.tire, tm.MF2006Parameters):
            return tm.TIRE_MF2006
        if isinstance(self.tire, tm.MFSimpleParameters):
            return tm.TIRE_MF_SIMPLE
        return tm.TIRE_LINEAR

    def pack(self):
        """Flat arrays consumed by the jitted kernels (without external force)."""
        c, s, pt, a = self.chassis, self.suspension, self.powertrain, self.actuators
        xw, yw = c.wheel_positions()
        m_u = np.array(s.unsprung_mass)
        values = dict(
            m_s=c.m, i_xx=c.i_xx, i_yy=c.i_yy, i_zz=c.i_zz, l_f=c.l_f, l_r=c.l_r,
            b_f=c.b_f, b_r=c.b_r, h_cog=c.h_cog, h_rp=c.h_rp,
            h_pp_accel=c.h_pp_accel, h_pp_decel=c.h_pp_decel,
            k_ar_f=s.k_ar_f, k_ar_r=s.k_ar_r,
            k_t=self.tire_vertical.spring_rate, r0=self.tire_vertical.unloaded_radius,
            sigma_kappa=self.relaxation.kappa, sigma_alpha=self.relaxation.alpha,
            tire_model=self.tire_model, drag=self.aero.drag, lift=self.aero.lift,
            l_aero=self.aero.l_aero, i_wheel=pt.wheel_inertia, i_engine=pt.engine_inertia,
            r_wheel=pt.wheel_radius, brake_gain=pt.brake_gain, brake_balance=pt.brake_balance,
            tau_steer=a.steer_tau, tau_throttle=a.throttle_tau, tau_brake=a.brake_tau,
            bypass=float(self.bypass_actuators), m_total=self.m_total,
            x_s=-(m_u * xw).sum() / c.m, y_s=-(m_u * yw).sum() / c.m,
        )
        for i in range(4):
            values[f"m_u{i}"] = s.unsprung_mass[i]
            values[f"k_s{i}"] = s.k_s[i]
            values[f"k_d{i}"] = s.k_d[i]
        pv = np.array([values[n] for n in PARAM_NAMES], dtype=float)
        if isinstance(self.tire, tm.MF2006Parameters):
            tc = np.array(self.tire.values)
        elif isinstance(self.tire, tm.MFSimpleParameters):
            tc = np.array(self.tire.lon + self.tire.lat, dtype=float)
        else:
            tc = np.array([self.tire.c_kappa, self.tire.c_alpha], dtype=float)
        emap = pt.engine_map
        return (pv, tc, np.array(emap.speeds), np.array(emap.throttles), np.array(emap.torque),
                np.array(pt.gear_ratios))

    def kernel_args(self, external=(0.0, 0.0, 0.0)):
        return self.pack() + (np.asarray(external, dtype=float),)


# --------------------------------------------------------------------------
# right-hand side


@njit(cache=True)
def _tire_forces(model, kappa, alpha, fz, tc):
    if fz <= 0.0:
        return 0.0, 0.0
    if model == 0:
        return tm.mf2006_kernel(kappa, alpha, 0.0, fz, tc)
    if model == 1:
        fx = tm.magic_formula(kappa, tc[0], tc[1], tc[2], tc[3])
        fy = tm.magic_formula(alpha, tc[4], tc[5], tc[6], tc[7])
        return fx, fy
    return tc[0] * kappa, tc[1] * alpha


@njit(cache=True)
def evaluate(x, u, args, dx, diag):
    """Fill ``dx`` with the state derivative and ``diag`` with wheel channels."""
    pv, tc, speeds, throttles, table, ratios, ext = args
    vx = x[VX]
    vy = x[VY]
    wz = x[WZ]
    roll = x[ROLL]
    pitch = x[PITCH]
    bypass = pv[P_BYPASS] > 0.5
    if bypass:
        steer = u[U_STEER]
        throttle = u[U_THROTTLE]
        brake = u[U_BRAKE]
    else:
        steer = x[STEER]
        throttle = x[THROTTLE]
        brake = x[BRAKE]
    if throttle < 0.0:
        throttle = 0.0
    elif throttle > 1.0:
        throttle = 1.0
    if brake < 0.0:
        brake = 0.0
    gear = int(u[U_GEAR])
    if gear < 1:
        gear = 1
    elif gear > ratios.shape[0]:
        gear = ratios.shape[0]
    ratio = ratios[gear - 1]

    l_f = pv[P_LF]
    l_r = pv[P_LR]
    xw = np.array((l_f, l_f, -l_r, -l_r))
    yw = np.array((0.5 * pv[P_BF], -0.5 * pv[P_BF], 0.5 * pv[P_BR], -0.5 * pv[P_BR]))
    r_w = pv[P_RW]
    k_t = pv[P_KT]
    model = int(pv[P_TIRE])
    cs = math.cos(steer)
    sn = math.sin(steer)

    fz = np.empty(4)
    fxw = np.empty(4)
    fyw = np.empty(4)
    fx = np.empty(4)
    fy = np.empty(4)
    z_s = np.empty(4)
    dz_s = np.empty(4)
    for i in range(4):
        fz[i] = tm.vertical_force_kernel(-x[ZU + i], k_t)
        z_s[i] = x[Z] + yw[i] * roll - xw[i] * pitch - x[ZU + i]
        dz_s[i] = x[VZ] + yw[i] * x[WX] - xw[i] * x[WY] - x[VZU + i]
        # contact patch velocity in wheel axes
        vcx = vx - wz * yw[i]
        vcy = vy + wz * xw[i]
        if i < 2:
            vwx = vcx * cs + vcy * sn
            vwy = -vcx * sn + vcy * cs
        else:
            vwx = vcx
            vwy = vcy
        den = abs(vwx)
        if den < SLIP_SPEED_FLOOR:
            den = SLIP_SPEED_FLOOR
        kappa_ss = (x[OMEGA + i] * r_w - vwx) / den
        alpha_ss = math.atan(-vwy / den)
        kl = x[KAPPA + i]
        al = x[ALPHA + i]
        dx[KAPPA + i] = tm.lag_rate(vwx, pv[P_SIGK]) * (kappa_ss - kl)
        dx[ALPHA + i] = tm.lag_rate(vwx, pv[P_SIGA]) * (alpha_ss - al)
        fxi, fyi = _tire_forces(model, kl, al, fz[i], tc)
        fxw[i] = fxi
        fyw[i] = fyi
        if i < 2:
            fx[i] = fxi * cs - fyi * sn
            fy[i] = fxi * sn + fyi * cs
        else:
            fx[i] = fxi
            fy[i] = fyi
        diag[D_FZ + i] = fz[i]
        diag[D_ALPHA + i] = alpha_ss
        diag[D_KAPPA + i] = kappa_ss

    # suspension
    f_c = np.empty(4)
    f_ar = np.zeros(4)
    f_a = np.empty(4)
    if pv[P_BF] > 0.0 or pv[P_BR] > 0.0:
        antiroll_kernel(-z_s, pv[P_KARF] if pv[P_BF] > 0.0 else 0.0,
                        pv[P_KARR] if pv[P_BR] > 0.0 else 0.0, f_ar)
    h_pp = pv[P_HPPA] if fx[2] + fx[3] >= 0.0 else pv[P_HPPD]
    axle_geometry_kernel(fx, fy, l_f, l_r, pv[P_BF], pv[P_BR], pv[P_HRP], h_pp, f_a)
    for i in range(4):
        f_c[i] = z_s[i] * pv[P_KS + i] + dz_s[i] * pv[P_KD + i] + f_ar[i] + f_a[i]

    f_drag, f_z_aero, m_y_aero = aero_kernel(vx, pv[P_DRAG], pv[P_LIFT], pv[P_LAERO])

    acc = np.empty(6)
    body_kernel(vx, vy, wz, f_c, fx, fy, f_drag, f_z_aero, m_y_aero, ext,
                pv[P_MTOT], pv[P_MS], pv[P_IXX], pv[P_IYY], pv[P_IZZ], xw, yw,
                pv[P_HCOG], pv[P_XS], pv[P_YS], acc)

    cy = math.cos(x[YAW])
    sy = math.sin(x[YAW])
    dx[X] = vx * cy - vy * sy
    dx[Y] = vx * sy + vy * cy
    dx[Z] = x[VZ]
    dx[ROLL] = x[WX]
    dx[PITCH] = x[WY]
    dx[YAW] = wz
    for k in range(6):
        dx[VX + k] = acc[k]
    for i in range(4):
        m_u = pv[P_MU + i]
        dx[ZU + i] = x[VZU + i]
        dx[VZU + i] = (fz[i] + f_c[i]) / m_u - G

    spin = np.empty(4)
    wheel_spin_kernel(x[OMEGA:OMEGA + 4], ratio, throttle, brake, fxw, speeds, throttles, table,
                      pv[P_IW], pv[P_IE], r_w, pv[P_BGAIN], pv[P_BBAL], spin)
    for i in range(4):
        dx[OMEGA + i] = spin[i]

    if bypass:
        dx[STEER] = 0.0
        dx[THROTTLE] = 0.0
        dx[BRAKE] = 0.0
    else:
        dx[STEER] = (u[U_STEER] - x[STEER]) / pv[P_TAUS]
        dx[THROTTLE] = (u[U_THROTTLE] - x[THROTTLE]) / pv[P_TAUT]
        dx[BRAKE] = (u[U_BRAKE] - x[BRAKE]) / pv[P_TAUB]

    for i in range(4):
        diag[D_FXW + i] = fxw[i]
        diag[D_FYW + i] = fyw[i]
        diag[D_FX + i] = fx[i]
        diag[D_FY + i] = fy[i]
        diag[D_FC + i] = f_c[i]


@njit(cache=True)
def rhs(x, u, args):
    dx = np.empty(N_STATE)
    diag = np.empty(N_DIAG)
    evaluate(x, u, args, dx, diag)
    return dx


# Not disk-cached: numba cannot cache functions that take a jitted callee.
@njit
def advance(x, u_seq, h, args):
    """Integrate ``len(u_seq)`` steps. Returns ``(x, failed_step, stage)``;
    ``failed_step`` is -1 when every step succeeded."""
    for k in range(u_seq.shape[0]):
        x_next, stage = dp45_step_jit(rhs, x, u_seq[k], h, args)
        if stage != 0:
            return x, k, stage
        x = x_next
    return x, -1, 0


@njit
def step(x, u, h, args):
    return dp45_step_jit(rhs, x, u, h, args)


def derivatives(x, u, params, external=(0.0, 0.0, 0.0), args=None):
    """State derivative for ``x`` under input ``u`` and an external force."""
    if args is None:
        args = params.kernel_args(external)
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    dx = np.empty(N_STATE)
    diag = np.empty(N_DIAG)
    evaluate(x, u, args, dx, diag)
    if not np.all(np.isfinite(dx)):
        raise ModelFault("non-finite state derivative", state=x.copy())
    return dx


def diagnostics(x, u, params, external=(0.0, 0.0, 0.0), args=None):
    """Wheel loads, slips and forces at ``x`` as a dict of length-4 arrays."""
    if args is None:
        args = params.kernel_args(external)
    dx = np.empty(N_STATE)
    diag = np.empty(N_DIAG)
    evaluate(np.asarray(x, dtype=float), np.asarray(u, dtype=float), args, dx, diag)
    names = ("fz", "alpha", "kappa", "fx_wheel", "fy_wheel", "fx", "fy", "f_c")
    return {n: diag[4 * k:4 * k + 4].copy() for k, n in enumerate(names)}


def command_vector(steering=0.0, throttle=0.0, brake=0.0, gear=1):
    return np.array([steering, throttle, brake, float(gear)])


# --------------------------------------------------------------------------
# equilibrium


def _vertical_residual(q, x, u, args):
    y = x.copy()
    y[[Z, ROLL, PITCH]] = q[:3]
    y[ZU:ZU + 4] = q[3:7]
    dx = rhs(y, u, args)
    return np.concatenate((dx[[VZ, WX, WY]], dx[VZU:VZU + 4]))


def _settle_vertical(x, u, args, params):
    m_u = np.array(params.suspension.unsprung_mass)
    k_t = params.tire_vertical.spring_rate
    downforce = -params.aero.lift * x[VX] ** 2
    loads = static_wheel_loads(params.chassis, params.m_total, downforce)
    guess = np.concatenate(([0.0, 0.0, 0.0], -loads / k_t))
    guess[0] = float(np.mean(guess[3:] - (loads - m_u * G) / np.array(params.suspension.k_s)))
    sol = optimize.root(_vertical_residual, guess, args=(x, u, args), method="lm", tol=1e-14)
    if not sol.success or np.max(np.abs(_vertical_residual(sol.x, x, u, args))) > 1e-6:
        raise ConfigurationError(f"no vertical equilibrium found: {sol.message}")
    if np.any(sol.x[3:] >= 0):
        raise ConfigurationError("equilibrium requires a lifted wheel")
    x[[Z, ROLL, PITCH]] = sol.x[:3]
    x[ZU:ZU + 4] = sol.x[3:]
    return x


def straight_line_trim(params, speed, pose=(0.0, 0.0, 0.0)):
    """State and command for steady straight driving at ``speed``.

    Solves the vertical equilibrium together with the rear-axle slip and
    throttle that balance drag. Returns ``(x, u)``.
    """
    if speed < 0:
        raise ConfigurationError("initial speed must be non-negative")
    pt = params.powertrain
    gear = gear_for_speed(speed, pt)
    x = np.zeros(N_STATE)
    x[X], x[Y], x[YAW] = pose
    x[VX] = speed
    x[OMEGA:OMEGA + 4] = speed / pt.wheel_radius
    u = command_vector(gear=gear)
    args = params.kernel_args()
    x = _settle_vertical(x, u, args, params)
    if speed == 0:
        return x, u
    drag = params.aero.drag * speed**2
    emap = pt.engine_map
    t_needed = drag * pt.wheel_radius / pt.ratio(gear)
    thr = float(np.clip(t_needed / max(emap.torque[:, -1].max(), 1e-9), 0.0, 1.0))
    den = max(speed, 1.0)

    def residual(q):
        y = x.copy()
        y[[Z, ROLL, PITCH]] = q[:3]
        y[ZU:ZU + 4] = q[3:7]
        omega_r = q[7]
        y[OMEGA + 2] = y[OMEGA + 3] = omega_r
        y[KAPPA + 2] = y[KAPPA + 3] = (omega_r * pt.wheel_radius - speed) / den
        y[THROTTLE] = q[8]
        uu = u.copy()
        uu[U_THROTTLE] = q[8]
        dx = rhs(y, uu, args)
        return np.concatenate((dx[[VZ, WX, WY]], dx[VZU:VZU + 4], dx[[VX, OMEGA + 2]]))

    q0 = np.concatenate((x[[Z, ROLL, PITCH]], x[ZU:ZU + 4], [speed / pt.wheel_radius * 1.001, thr]))
    sol = optimize.root(residual, q0, method="lm", tol=1e-14)
    if not sol.success or np.max(np.abs(residual(sol.x))) > 1e-6 or not 0.0 <= sol.x[8] <= 1.0:
        raise ConfigurationError(f"no straight-line trim at {speed:.1f} m/s: {sol.message}")
    q = sol.x
    x[[Z, ROLL, PITCH]] = q[:3]
    x[ZU:ZU + 4] = q[3:7]
    x[OMEGA + 2] = x[OMEGA + 3] = q[7]
    x[KAPPA + 2] = x[KAPPA + 3] = (q[7] * pt.wheel_radius - speed) / den
    x[THROTTLE] = q[8]
    u[U_THROTTLE] = q[8]
    return x, u


def initial_state(params, pose=(0.0, 0.0, 0.0), speed=0.0):
    """Free-rolling state at ``speed`` in vertical equilibrium.

    Wheels roll without slip and all pedals are released, so the state is
    balanced vertically and in roll and pitch but coasts down. Use
    :func:`straight_line_trim` for a state that holds its speed; that one
    only exists below the vehicle's top speed.
    """
    if speed < 0:
        raise ConfigurationError("initial speed must be non-negative")
    x = np.zeros(N_STATE)
    x[X], x[Y], x[YAW] = pose
    x[VX] = speed
    x[OMEGA:OMEGA + 4] = speed / params.powertrain.wheel_radius
    u = command_vector(gear=gear_for_speed(speed, params.powertrain))
    return _settle_vertical(x, u, params.kernel_args(), params)


def wheel_loads(x, params):
    k_t = params.tire_vertical.spring_rate
    return np.maximum(0.0, -k_t * np.asarray(x)[..., ZU:ZU + 4])


# --------------------------------------------------------------------------
# variants


def make_variant(base, variant, median_load=None):
    """Derive one of the simplified models from the baseline parameters.

    ``median_load`` is the median wheel load seen by the baseline model on the
    lap in question; the tire-swap variants are identified at that load. When
    omitted the median static wheel load is used.
    """
    v = ModelVariant.parse(variant)
    if v is ModelVariant.BASE:
        return base
    if v in (ModelVariant.MF_SIMPLE, ModelVariant.LINEAR_TIRES, ModelVariant.LESS_GRIP):
        if not isinstance(base.tire, tm.MF2006Parameters):
            raise ConfigurationError(f"{v.value} needs a full Magic Formula baseline tire")
    if median_load is None:
        median_load = float(np.median(static_wheel_loads(base.chassis, base.m_total)))
    if v is ModelVariant.MF_SIMPLE:
        return replace(base, tire=tm.fit_simple_from_full(base.tire, median_load))
    if v is ModelVariant.LINEAR_TIRES:
        return replace(base, tire=tm.linear_from_full(base.tire, median_load))
    if v in (ModelVariant.COG0, ModelVariant.SINGLE_TRACK_COG0):
        ch = replace(base.chassis, h_cog=0.0, h_rp=0.0, h_pp_accel=0.0, h_pp_decel=0.0)
        if v is ModelVariant.SINGLE_TRACK_COG0:
            ch = replace(ch, b_f=0.0, b_r=0.0)
        return replace(base, chassis=ch, zero_cog_height=True,
                       zero_track_width=v is ModelVariant.SINGLE_TRACK_COG0)
    if v is ModelVariant.NO_DELAY:
        return replace(base, bypass_actuators=True)
    if v is ModelVariant.LESS_GRIP:
        return replace(base, tire=base.tire.scaled(LMUX=0.9, LMUY=0.9, LKX=0.9, LKY=0.9))
    if v is ModelVariant.LESS_LIFT:
        return replace(base, aero=replace(base.aero, lift=0.9 * base.aero.lift))
    raise ConfigurationError(f"unhandled variant {v}")


# --------------------------------------------------------------------------
# parameter files


def _resolve(base_dir, ref):
    path = Path(ref)
    return path if path.is_absolute() else Path(base_dir) / path


def vehicle_from_mapping(data, base_dir="."):
    if data.get("version") != SCHEMA_VERSION:
        raise ConfigurationError(f"unsupported vehicle file version {data.get('version')!r}")
    try:
        tire_spec = data["tire"]
        if isinstance(tire_spec, str):
            tire = tm.load_tire_file(_resolve(base_dir, tire_spec))
        else:
            tire = tm.tire_from_mapping(tire_spec)
        pt = dict(data["powertrain"])
        emap = pt.pop("engine_map")
        if isinstance(emap, str):
            emap = EngineMap.from_csv(_resolve(base_dir, emap))
        else:
            emap = EngineMap(np.array(emap["speeds"]), np.array(emap["throttles"]), np.array(emap["torque"]))
        flags = data.get("flags", {})
        return VehicleParameters(
            chassis=ChassisParameters(**data["chassis"]),
            suspension=WheelSuspension(**data["suspension"]),
            tire=tire,
            tire_vertical=tm.TireVertical(**data["tire_vertical"]),
            relaxation=tm.RelaxationLengths(**data["relaxation"]),
            aero=AeroParameters(**data["aero"]),
            powertrain=PowertrainParameters(engine_map=emap, **pt),
            actuators=ActuatorParameters(**data.get("actuators", {})),
            zero_track_width=flags.get("zero_track_width", False),
            zero_cog_height=flags.get("zero_cog_height", False),
            bypass_actuators=flags.get("bypass_actuators", False),
        )
    except (KeyError, TypeError) as exc:
        raise ConfigurationError(f"invalid vehicle file: {exc}") from None


def load_vehicle(path):
    path = Path(path)
    return vehicle_from_mapping(json.loads(path.read_text()), base_dir=path.parent)


def vehicle_to_mapping(p):
    """Self-contained mapping (tire and engine map inlined)."""
    pt = p.powertrain
    emap = pt.engine_map
    return {
        "version": SCHEMA_VERSION,
        "chassis": asdict(p.chassis),
        "suspension": {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(p.suspension).items()},
        "tire": tm.tire_to_mapping(p.tire),
        "tire_vertical": asdict(p.tire_vertical),
        "relaxation": asdict(p.relaxation),
        "aero": asdict(p.aero),
        "powertrain": {
            "engine_map": {"speeds": emap.speeds.tolist(), "throttles": emap.throttles.tolist(),
                           "torque": emap.torque.tolist()},
            "gear_ratios": list(pt.gear_ratios),
            "wheel_inertia": pt.wheel_inertia, "engine_inertia": pt.engine_inertia,
            "wheel_radius": pt.wheel_radius, "brake_gain": pt.brake_gain,
            "brake_balance": pt.brake_balance, "upshift_rpm": pt.upshift_rpm,
            "shift_hysteresis_rpm": pt.shift_hysteresis_rpm,
        },
        "actuators": asdict(p.actuators),
        "flags": {"zero_track_width": p.zero_track_width, "zero_cog_height": p.zero_cog_height,
                  "bypass_actuators": p.bypass_actuators},
    }


def save_vehicle(p, path):
    Path(path).write_text(json.dumps(vehicle_to_mapping(p), indent=2))


DATA_DIR = Path(__file__).parent / "data"


def default_vehicle():
    """The shipped baseline parameter set."""
    return load_vehicle(DATA_DIR / "vehicle.json")
