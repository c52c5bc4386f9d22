"""Sprung body, wheel vertical dynamics and suspension coupling forces.

Axes are ISO 8855 (x forward, y left, z up). Wheel order is fl, fr, rl, rr.

Vertical suspension forces use one convention throughout: a positive force
pulls the body corner down and pushes the wheel up, i.e. it unloads the tire.
With this convention the spring force is ``extension * k_s``. The wheel
travel fed to the anti-roll bar is the wheel's upward displacement relative
to its body corner, so a bar always opposes a left/right travel difference.
"""
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConfigurationError, ModelFault

G = 9.81
FL, FR, RL, RR = 0, 1, 2, 3


@dataclass(frozen=True)
class ChassisParameters:
    """Body parameters. ``l_f``, ``l_r`` and ``h_cog`` locate the CoG of the
    complete vehicle, which is the reference point of the body equations."""

    m: float
    i_xx: float
    i_yy: float
    i_zz: float
    l_f: float
    l_r: float
    b_f: float
    b_r: float
    h_cog: float
    h_rp: float
    h_pp_accel: float
    h_pp_decel: float

    def __post_init__(self):
        if not self.m > 0:
            raise ConfigurationError("sprung mass must be positive")
        if min(self.i_xx, self.i_yy, self.i_zz) <= 0:
            raise ConfigurationError("inertias must be positive")
        if not self.l_f + self.l_r > 0:
            raise ConfigurationError("wheelbase must be positive")
        if self.b_f < 0 or self.b_r < 0:
            raise ConfigurationError("track widths must be non-negative")

    @property
    def wheelbase(self):
        return self.l_f + self.l_r

    def wheel_positions(self):
        """(x_i, y_i) of the four contact patches relative to the CoG."""
        x = np.array([self.l_f, self.l_f, -self.l_r, -self.l_r])
        y = np.array([self.b_f, -self.b_f, self.b_r, -self.b_r]) / 2.0
        return x, y


@dataclass(frozen=True)
class WheelSuspension:
    unsprung_mass: tuple
    k_s: tuple
    k_d: tuple
    k_ar_f: float
    k_ar_r: float

    def __post_init__(self):
        for name in ("unsprung_mass", "k_s", "k_d"):
            value = tuple(float(v) for v in getattr(self, name))
            if len(value) != 4:
                raise ConfigurationError(f"{name} needs four entries")
            object.__setattr__(self, name, value)
        if min(self.unsprung_mass) <= 0 or min(self.k_s) <= 0:
            raise ConfigurationError("unsprung masses and spring rates must be positive")
        if min(self.k_d) < 0:
            raise ConfigurationError("damper coefficients must be non-negative")
        if self.k_ar_f < 0 or self.k_ar_r < 0:
            raise ConfigurationError("anti-roll bar rates must be non-negative")


@njit(cache=True)
def spring_damper_kernel(z_s, dz_s, k_s, k_d):
    return z_s * k_s, dz_s * k_d


@njit(cache=True)
def antiroll_kernel(z_w, k_ar_f, k_ar_r, out):
    front = (z_w[FR] - z_w[FL]) * k_ar_f
    rear = (z_w[RR] - z_w[RL]) * k_ar_r
    out[FL] = front
    out[FR] = -front
    out[RL] = rear
    out[RR] = -rear


@njit(cache=True)
def axle_geometry_kernel(fx, fy, l_f, l_r, b_f, b_r, h_rp, h_pp, out):
    # A vanishing track width has no roll lever arm, the lateral term is zero.
    lat_f = 2.0 * h_rp / b_f if b_f > 0.0 else 0.0
    lat_r = 2.0 * h_rp / b_r if b_r > 0.0 else 0.0
    lon_f = h_pp / l_f if l_f > 0.0 else 0.0
    lon_r = h_pp / l_r if l_r > 0.0 else 0.0
    out[FL] = fy[FL] * lat_f + fx[FL] * lon_f
    out[FR] = -fy[FR] * lat_f + fx[FR] * lon_f
    out[RL] = fy[RL] * lat_r - fx[RL] * lon_r
    out[RR] = -fy[RR] * lat_r - fx[RR] * lon_r


def spring_damper_forces(z_s, dz_s, k_s, k_d):
    return spring_damper_kernel(z_s, dz_s, k_s, k_d)


def antiroll_forces(z_w, k_ar_f, k_ar_r):
    out = np.empty(4)
    antiroll_kernel(np.asarray(z_w, dtype=float), k_ar_f, k_ar_r, out)
    return out


def axle_geometry_forces(fx, fy, p, accelerating):
    """Squat/lift and jacking forces from tire forces in body axes.

    ``accelerating`` selects the pitch pivot height.
    """
    out = np.empty(4)
    h_pp = p.h_pp_accel if accelerating else p.h_pp_decel
    axle_geometry_kernel(np.asarray(fx, dtype=float), np.asarray(fy, dtype=float),
                         p.l_f, p.l_r, p.b_f, p.b_r, p.h_rp, h_pp, out)
    return out


def composite_suspension_force(f_s, f_d, f_ar, f_a):
    return np.asarray(f_s) + np.asarray(f_d) + np.asarray(f_ar) + np.asarray(f_a)


@njit(cache=True)
def body_kernel(vx, vy, wz, f_c, fx, fy, f_drag, f_z_aero, m_y_aero, ext,
                m_total, m_sprung, i_xx, i_yy, i_zz, xw, yw, h_cog, x_s, y_s, out):
    """Six accelerations ``(dvx, dvy, dvz, dp, dq, dr)`` of the body.

    ``f_c`` are the composite suspension forces (positive down on the body),
    ``fx``/``fy`` the tire forces in body axes acting at road level, ``ext``
    an external force ``(Fx, Fy, Fz)`` at the CoG. The sprung-mass CoG sits at
    ``(x_s, y_s)`` relative to the vehicle CoG.
    """
    sfx = 0.0
    sfy = 0.0
    sfc = 0.0
    mx = 0.0
    my = 0.0
    mz = 0.0
    for i in range(4):
        sfx += fx[i]
        sfy += fy[i]
        sfc += f_c[i]
        mx -= yw[i] * f_c[i]
        my += xw[i] * f_c[i]
        mz += xw[i] * fy[i] - yw[i] * fx[i]
    out[0] = (sfx + f_drag + ext[0]) / m_total + wz * vy
    out[1] = (sfy + ext[1]) / m_total - wz * vx
    out[2] = (f_z_aero - sfc + ext[2]) / m_sprung - G
    out[3] = (mx + h_cog * sfy - y_s * m_sprung * G) / i_xx
    out[4] = (my - h_cog * sfx + x_s * m_sprung * G - m_y_aero) / i_yy
    out[5] = mz / i_zz


def body_derivatives(rates, f_c, fx, fy, aero, external, p, suspension):
    """Python entry to :func:`body_kernel` using parameter records.

    ``rates`` is ``(vx, vy, vz, p, q, r)``, ``aero`` is
    ``(F_drag, F_z_aero, M_y_aero)``, ``external`` ``(Fx, Fy, Fz)``.
    """
    m_u = np.asarray(suspension.unsprung_mass)
    xw, yw = p.wheel_positions()
    m_total = p.m + m_u.sum()
    x_s = -(m_u * xw).sum() / p.m
    y_s = -(m_u * yw).sum() / p.m
    args = [np.asarray(a, dtype=float) for a in (f_c, fx, fy, external)]
    if not all(np.all(np.isfinite(a)) for a in args) or not np.all(np.isfinite(aero)):
        raise ModelFault("non-finite input to body equations")
    out = np.empty(6)
    body_kernel(rates[0], rates[1], rates[5], args[0], args[1], args[2], aero[0], aero[1], aero[2],
                args[3], m_total, p.m, p.i_xx, p.i_yy, p.i_zz, xw, yw, p.h_cog, x_s, y_s, out)
    return out


def static_wheel_loads(p, m_total, downforce=0.0):
    """Per-wheel loads of a vehicle at rest on a flat road.

    ``downforce`` is a positive downward aero load acting at the CoG.
    """
    w = m_total * G + downforce
    front = w * p.l_r / (p.l_f + p.l_r)
    rear = w - front
    return np.array([front / 2, front / 2, rear / 2, rear / 2])
