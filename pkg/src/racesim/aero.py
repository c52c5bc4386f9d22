"""Aerodynamic drag, lift and pitch moment."""
from dataclasses import dataclass

from numba import njit

from .errors import ConfigurationError


@dataclass(frozen=True)
class AeroParameters:
    """``drag`` is 0.5*rho*c_d*A and ``lift`` is 0.5*rho*c_l*A, both in kg/m.

    A negative ``lift`` produces downforce. ``l_aero`` is the distance of the
    lift force's point of action ahead of the CoG.
    """

    drag: float
    lift: float
    l_aero: float = 0.0

    def __post_init__(self):
        if self.drag < 0:
            raise ConfigurationError("drag coefficient-area must be non-negative")


@njit(cache=True)
def aero_kernel(v_x, drag, lift, l_aero):
    f_z = lift * v_x * v_x
    return -drag * v_x * abs(v_x), f_z, f_z * l_aero


def aero_wrench(v_x, p):
    """``(F_drag, F_z_aero, M_y_aero)`` for airspeed ``v_x``.

    Drag opposes motion. ``M_y_aero = F_z_aero * l_aero``, positive nose-up.
    """
    return aero_kernel(v_x, p.drag, p.lift, p.l_aero)
