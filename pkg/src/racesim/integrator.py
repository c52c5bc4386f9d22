"""Fixed-step Dormand-Prince 5(4) integration.

The step propagates the fifth-order solution and never evaluates the embedded
fourth-order estimate, so only the six stages that contribute to the
solution are computed. The seventh (first-same-as-last) stage of the tableau
only feeds the error estimate. Skipping it does not change the result.

Two entry points share one stage routine:

* :func:`dp45_step` / :func:`integrate` accept any Python callable
  ``f(x, u) -> dx`` and are meant for tests and small systems.
* :data:`dp45_step_jit` is the same routine compiled with numba. The vehicle
  model uses it with a jitted right-hand side ``f(x, u, args)``.
"""
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .errors import IntegrationFault

DEFAULT_STEP = 800e-6

# Dormand & Prince (1980) coefficients, Hairer/Norsett/Wanner layout. The
# exact rationals serve the arbitrary-precision path, floats the fast one.
A_EXACT = (
    (),
    (Fraction(1, 5),),
    (Fraction(3, 40), Fraction(9, 40)),
    (Fraction(44, 45), Fraction(-56, 15), Fraction(32, 9)),
    (Fraction(19372, 6561), Fraction(-25360, 2187), Fraction(64448, 6561), Fraction(-212, 729)),
    (Fraction(9017, 3168), Fraction(-355, 33), Fraction(46732, 5247), Fraction(49, 176),
     Fraction(-5103, 18656)),
)
B_EXACT = (Fraction(35, 384), Fraction(0), Fraction(500, 1113), Fraction(125, 192),
           Fraction(-2187, 6784), Fraction(11, 84))

(A21,), (A31, A32), (A41, A42, A43), (A51, A52, A53, A54), (A61, A62, A63, A64, A65) = (
    tuple(float(c) for c in row) for row in A_EXACT[1:])
B1, _, B3, B4, B5, B6 = (float(c) for c in B_EXACT)


@dataclass(frozen=True)
class IntegratorConfig:
    step_size: float = DEFAULT_STEP
    method: str = "dp45_fixed"

    def __post_init__(self):
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if self.method != "dp45_fixed":
            raise ValueError(f"unknown integration method {self.method!r}")


def _dp45_stages(f, x, u, h, args):
    """One step. Returns ``(x_next, stage)`` where ``stage`` is 0 on success
    or the 1-based index of the first stage with a non-finite derivative."""
    k1 = f(x, u, args)
    if not np.all(np.isfinite(k1)):
        return x, 1
    k2 = f(x + h * (A21 * k1), u, args)
    if not np.all(np.isfinite(k2)):
        return x, 2
    k3 = f(x + h * (A31 * k1 + A32 * k2), u, args)
    if not np.all(np.isfinite(k3)):
        return x, 3
    k4 = f(x + h * (A41 * k1 + A42 * k2 + A43 * k3), u, args)
    if not np.all(np.isfinite(k4)):
        return x, 4
    k5 = f(x + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4), u, args)
    if not np.all(np.isfinite(k5)):
        return x, 5
    k6 = f(x + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5), u, args)
    if not np.all(np.isfinite(k6)):
        return x, 6
    return x + h * (B1 * k1 + B3 * k3 + B4 * k4 + B5 * k5 + B6 * k6), 0


dp45_step_jit = njit(_dp45_stages)


def _wrap(f):
    def g(x, u, _args):
        return np.asarray(f(x, u), dtype=float)

    return g


def _generic_stages(f, x, u, ha, hb):
    """Stage routine for arbitrary scalar types held in object arrays.

    ``ha`` and ``hb`` are the tableau weights already multiplied by the step
    and converted to the scalar type.
    """
    k = []
    for stage, row in enumerate(ha, start=1):
        xi = x
        # array operands first, so numpy drives the elementwise products
        for c, kj in zip(row, k):
            xi = xi + kj * c
        ki = np.asarray(f(xi, u), dtype=object)
        if not all(math.isfinite(float(v)) for v in ki):
            return x, stage
        k.append(ki)
    inc = k[0] * hb[0]
    for c, kj in zip(hb[1:], k[1:]):
        inc = inc + kj * c
    return x + inc, 0


def dp45_step(f, x, u, h):
    """Advance ``x`` by one step of size ``h`` holding ``u`` constant.

    Raises :class:`IntegrationFault` if any stage derivative is not finite.
    """
    if not h > 0:
        raise ValueError("step size must be positive")
    x = np.asarray(x, dtype=float)
    x_next, stage = _dp45_stages(_wrap(f), x, u, h, None)
    if stage:
        raise IntegrationFault(stage)
    return x_next


def integrate(f, x0, input_schedule, h, t_end, number=None):
    """Integrate from ``t=0`` to ``t_end`` with fixed steps.

    ``input_schedule(t)`` is sampled once at the start of every step (zero-order
    hold). Returns a list of ``(t, x)`` samples at ``0, h, 2h, ...``. The final
    sample time is ``round(t_end / h) * h``.

    ``number`` switches to arbitrary precision: it converts a
    :class:`~fractions.Fraction` to the scalar type to compute in (for example
    an mpmath ``mpf``), and states, ``h`` and ``f`` then use that type.
    """
    if t_end < 0:
        raise ValueError("t_end must be non-negative")
    if not h > 0:
        raise ValueError("step size must be positive")
    if number is None:
        g = _wrap(f)
        x = np.array(x0, dtype=float)

        def advance(x, u):
            return _dp45_stages(g, x, u, h, None)
    else:
        x = np.array([number(Fraction(v)) if isinstance(v, (int, Fraction)) else v for v in x0], dtype=object)
        # converted once so a high-precision run is not limited by float64 coefficients
        ha = [[h * number(c) for c in row] for row in A_EXACT]
        hb = [h * number(c) for c in B_EXACT]

        def advance(x, u):
            return _generic_stages(f, x, u, ha, hb)
    n = int(round(float(t_end) / float(h)))
    out = [(0.0, x.copy())]
    for k in range(n):
        t = k * h
        x, stage = advance(x, input_schedule(t))
        if stage:
            raise IntegrationFault(stage, time=t)
        out.append(((k + 1) * h, x))
    return out
