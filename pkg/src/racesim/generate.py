"""Synthetic tracks and reference laps.

Corners are circular arcs entered and left through clothoids (curvature
ramped linearly over ``transition`` metres), so heading, curvature and the
steering demand are continuous. Bank angle follows the curvature ramp.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid
from shapely.geometry import LineString

from .chassis import G
from .driveline import RPM_PER_RAD_S, engine_torque
from .errors import GenerationError
from .loop.reference import ReferenceLap
from .tire import MF2006Parameters, pure_slip_coefficients
from .track import MAX_SPACING, TrackCenterline

# integration spacing for the centerline geometry
FINE_STEP = 0.05


@dataclass(frozen=True)
class Corner:
    radius: float
    angle: float  # radians, positive to the left
    bank: float = 0.0


@dataclass(frozen=True)
class GeneratorSpec:
    """Either an oval (``kind="oval"``) or a road course of ``corners``.

    For the road course the ``straights`` are nominal lengths before each
    corner; they are adjusted (least change) so the course closes.
    """

    kind: str
    straight: float = 400.0
    radius: float = 180.0
    bank_straight: float = 0.0
    bank_turn: float = 0.1
    corners: tuple = ()
    straights: tuple = ()
    min_straight: float = 20.0
    transition: float = 40.0
    spacing: float = 1.0
    name: str = ""
    grip_fraction: float = 0.6

    def __post_init__(self):
        if self.kind not in ("oval", "road_course"):
            raise GenerationError(f"unknown track kind {self.kind!r}")
        if not 0 < self.spacing <= MAX_SPACING:
            raise GenerationError(f"sample spacing must lie in (0, {MAX_SPACING}] m")
        if self.transition < 0 or not 0 < self.grip_fraction <= 1:
            raise GenerationError("invalid transition length or grip fraction")
        if self.kind == "oval" and (self.radius <= 0 or self.straight < 0):
            raise GenerationError("oval needs a positive radius and non-negative straights")
        if self.kind == "road_course":
            if not self.corners or len(self.straights) != len(self.corners):
                raise GenerationError("road course needs one nominal straight per corner")
            if any(c.radius <= 0 for c in self.corners):
                raise GenerationError("corner radii must be positive")


ROAD_COURSE = GeneratorSpec(
    kind="road_course",
    corners=(
        Corner(120.0, math.radians(90)),
        Corner(50.0, math.radians(120)),
        Corner(80.0, math.radians(-60)),
        Corner(60.0, math.radians(90)),
        Corner(100.0, math.radians(60)),
        Corner(150.0, math.radians(60)),
    ),
    straights=(300.0, 150.0, 120.0, 200.0, 180.0, 250.0),
    transition=25.0,
    name="road_course",
)
OVAL = GeneratorSpec(kind="oval", straight=400.0, radius=180.0, bank_turn=0.1, name="oval")


def _corner_profile(c, transition):
    """Curvature and bank as functions of distance through one corner.

    Returns ``(length, kappa(s), bank(s))`` with the clothoid length shortened
    when the corner is too short for the full transition.
    """
    k = math.copysign(1.0 / c.radius, c.angle)
    theta = abs(c.angle)
    lt = min(transition, 0.5 * theta * c.radius)
    arc = (theta - lt / c.radius) * c.radius
    length = 2.0 * lt + arc

    def ramp(s):
        if lt == 0.0:
            return np.ones_like(s)
        return np.clip(np.minimum(s, length - s) / lt, 0.0, 1.0)

    return length, (lambda s: k * ramp(s)), (lambda s: ramp(s))


def _layout(pieces, spacing, closed):
    """Integrate a list of ``(length, kappa(s), bank(s))`` pieces."""
    s_parts, k_parts, b_parts = [], [], []
    s0 = 0.0
    for length, kappa, bank in pieces:
        if length <= 0:
            continue
        n = max(1, math.ceil(length / FINE_STEP))
        u = np.linspace(0.0, length, n + 1)
        s_parts.append(s0 + u[:-1])
        k_parts.append(kappa(u[:-1]))
        b_parts.append(bank(u[:-1]))
        s0 += length
    s = np.concatenate(s_parts + [[s0]])
    k = np.concatenate(k_parts + [[k_parts[0][0] if closed else k_parts[-1][-1]]])
    b = np.concatenate(b_parts + [[b_parts[0][0] if closed else b_parts[-1][-1]]])
    # the trapezoid rule is exact for the heading of arcs and clothoids
    psi = cumulative_trapezoid(k, s, initial=0.0)
    x = cumulative_trapezoid(np.cos(psi), s, initial=0.0)
    y = cumulative_trapezoid(np.sin(psi), s, initial=0.0)
    n_out = max(3, math.ceil(s0 / spacing))
    s_out = np.linspace(0.0, s0, n_out + 1)
    return s_out, [np.interp(s_out, s, v) for v in (x, y, psi, k, b)]


def _corner_displacement(c, transition):
    length, kappa, _ = _corner_profile(c, transition)
    s_out, (x, y, psi, _, _) = _layout([(length, kappa, lambda s: np.zeros_like(s))], FINE_STEP, False)
    return np.array([x[-1], y[-1]]), psi[-1]


def _solve_straights(spec):
    """Least-change straight lengths that close the road course."""
    heading = 0.0
    rows = []
    arc_disp = np.zeros(2)
    for c in spec.corners:
        rows.append((math.cos(heading), math.sin(heading)))
        disp, dpsi = _corner_displacement(c, spec.transition)
        rot = np.array([[math.cos(heading), -math.sin(heading)], [math.sin(heading), math.cos(heading)]])
        arc_disp += rot @ disp
        heading += dpsi
    turn = sum(c.angle for c in spec.corners)
    if abs(turn - 2.0 * math.pi) > 1e-9:
        raise GenerationError(f"corners turn {math.degrees(turn):.1f} deg, a closed course needs 360")
    A = np.array(rows).T
    nominal = np.array(spec.straights, dtype=float)
    residual = -arc_disp - A @ nominal
    lengths = nominal + A.T @ np.linalg.solve(A @ A.T, residual)
    if np.any(lengths < spec.min_straight):
        raise GenerationError(f"course cannot close with straights >= {spec.min_straight} m: {lengths.round(1)}")
    return lengths


def generate_track(spec):
    """Build the centerline described by ``spec``."""
    straight_piece = (lambda L, bank: (L, lambda s: np.zeros_like(s), lambda s: np.full_like(s, bank)))
    pieces = []
    if spec.kind == "oval":
        corner = Corner(spec.radius, math.pi)
        length, kappa, ramp = _corner_profile(corner, spec.transition)
        bank = (lambda s: spec.bank_straight + (spec.bank_turn - spec.bank_straight) * ramp(s))
        for _ in range(2):
            pieces.append(straight_piece(spec.straight, spec.bank_straight))
            pieces.append((length, kappa, bank))
    else:
        lengths = _solve_straights(spec)
        for L, c in zip(lengths, spec.corners):
            length, kappa, ramp = _corner_profile(c, spec.transition)
            pieces.append(straight_piece(L, spec.bank_straight))
            pieces.append((length, kappa, (lambda r, b: lambda s: b * r(s))(ramp, c.bank)))
    s, (x, y, psi, k, b) = _layout(pieces, spec.spacing, True)
    gap = math.hypot(x[-1] - x[0], y[-1] - y[0])
    if gap > 1e-3:
        raise GenerationError(f"generated course does not close (gap {gap:.3g} m)")
    x[-1], y[-1] = x[0], y[0]
    if not LineString(np.column_stack((x[:-1], y[:-1]))).is_simple:
        raise GenerationError("generated course overlaps itself")
    z = np.zeros_like(s)
    return TrackCenterline(s, x, y, z, psi, k, b, np.zeros_like(s), closed=True, name=spec.name)


# --------------------------------------------------------------------------
# reference laps


def peak_friction(tire, fz):
    """Lateral and longitudinal peak friction coefficients at load ``fz``."""
    if not isinstance(tire, MF2006Parameters):
        raise GenerationError("lap generation needs the full Magic Formula tire")
    c = pure_slip_coefficients(fz, tire)
    return c["lat"][2] / fz, c["lon"][2] / fz


def grip_limit(curvature, mu, lift, mass):
    """Lateral acceleration limit at each curvature with downforce.

    Solves ``a = mu * (g + |lift| * v^2 / m)`` with ``v^2 = a / |kappa|``; where
    downforce outgrows the curvature the limit is unbounded (``inf``).
    """
    k = np.abs(curvature)
    c = mu * abs(lift) / mass
    with np.errstate(divide="ignore"):
        return np.where(k > c, mu * G * k / np.maximum(k - c, 1e-300), np.inf)


def drive_force_limit(v, powertrain):
    """Largest full-throttle wheel force at speed ``v`` over all gears."""
    best = 0.0
    for g, ratio in enumerate(powertrain.gear_ratios, start=1):
        rpm = v / powertrain.wheel_radius * ratio * RPM_PER_RAD_S
        if rpm > powertrain.engine_map.max_speed:
            continue
        t = engine_torque(rpm, 1.0, powertrain.engine_map)
        best = max(best, t * ratio / powertrain.wheel_radius)
    return best


def top_speed(params):
    v = np.arange(1.0, 150.0, 0.25)
    surplus = np.array([drive_force_limit(vi, params.powertrain) for vi in v]) - params.aero.drag * v**2
    above = np.nonzero(surplus > 0)[0]
    if above.size == 0:
        raise GenerationError("vehicle cannot overcome drag")
    return float(v[above[-1]])


def generate_lap(track, params, fraction, v_max=None):
    """Quasi-steady speed profile for driving the centerline.

    Corner speeds use ``v^2 * |kappa| = fraction * mu * (g + |lift| * v^2 / m)``,
    so the lateral acceleration is ``fraction`` of the grip available at the
    speed actually driven, downforce included. Speeds are then capped at the
    straight-line top speed and limited by forward (traction and power) and
    backward (braking) acceleration passes that share the friction budget.
    """
    if not 0 < fraction <= 1:
        raise GenerationError("grip fraction must lie in (0, 1]")
    m = params.m_total
    fz_static = m * G / 4.0
    mu_y, mu_x = peak_friction(params.tire, fz_static)
    lift = params.aero.lift
    cap = top_speed(params) if v_max is None else min(v_max, top_speed(params))
    a_lat = grip_limit(track.curvature, fraction * mu_y, lift, m)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = np.sqrt(a_lat / np.abs(track.curvature))
    v = np.minimum(np.nan_to_num(v, nan=cap, posinf=cap), cap)

    s = track.s
    ds = np.diff(s)
    k = np.abs(track.curvature)
    n = len(ds)  # unique samples; sample n repeats sample 0
    pt = params.powertrain

    def long_budget(vi, i):
        total = fraction * mu_x * (G + abs(lift) * vi * vi / m)
        lat = vi * vi * k[i]
        return math.sqrt(max(total * total - lat * lat, 0.0))

    # two rounds so the limits carry across the seam
    for _ in range(2):
        for i in range(n):
            j = (i + 1) % n
            a = min(long_budget(v[i], i), (drive_force_limit(v[i], pt) - params.aero.drag * v[i] ** 2) / m)
            v[j] = min(v[j], math.sqrt(v[i] ** 2 + 2.0 * max(a, 0.0) * ds[i]))
        for i in range(n, 0, -1):
            i %= n
            j = (i - 1) % n
            v[j] = min(v[j], math.sqrt(v[i] ** 2 + 2.0 * long_budget(v[i], i) * ds[j]))
    v[-1] = v[0]
    ax = v * np.gradient(v, s)
    ax[-1] = ax[0]
    return ReferenceLap(s.copy(), np.zeros(len(s)), v, track.curvature.copy(), ax, name=track.name)
