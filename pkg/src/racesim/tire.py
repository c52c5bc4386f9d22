"""Tire force models in three fidelities plus transient slip and the vertical spring.

Sign conventions (ISO 8855 wheel axes, x forward, y left):

* ``kappa`` is the longitudinal slip ratio, positive when driving.
* ``alpha`` is the slip angle, defined so that a positive angle produces a
  positive (leftward) lateral force. Lateral stiffness coefficients in the
  parameter files are therefore positive.

The full model is the 2006 edition of the Magic Formula for pure and combined
slip forces. Aligning moment and turn slip are not modelled, all turn-slip
weighting factors are one.
"""
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numba import njit

from .errors import ConfigurationError, FitError, TireModelError

# Coefficient layout of the full-model array. Names follow the usual .tir keys.
MF2006_NAMES = (
    "FNOMIN",
    # scaling factors
    "LFZO", "LCX", "LMUX", "LEX", "LKX", "LHX", "LVX",
    "LCY", "LMUY", "LEY", "LKY", "LHY", "LVY", "LKYC",
    "LXAL", "LYKA", "LVYKA",
    # pure longitudinal
    "PCX1", "PDX1", "PDX2", "PDX3", "PEX1", "PEX2", "PEX3", "PEX4",
    "PKX1", "PKX2", "PKX3", "PHX1", "PHX2", "PVX1", "PVX2",
    # combined longitudinal
    "RBX1", "RBX2", "RBX3", "RCX1", "REX1", "REX2", "RHX1",
    # pure lateral
    "PCY1", "PDY1", "PDY2", "PDY3", "PEY1", "PEY2", "PEY3", "PEY4",
    "PKY1", "PKY2", "PKY3", "PHY1", "PHY2", "PHY3",
    "PVY1", "PVY2", "PVY3", "PVY4",
    # combined lateral
    "RBY1", "RBY2", "RBY3", "RBY4", "RCY1", "REY1", "REY2", "RHY1", "RHY2",
    "RVY1", "RVY2", "RVY3", "RVY4", "RVY5", "RVY6",
)
(
    FNOMIN,
    LFZO, LCX, LMUX, LEX, LKX, LHX, LVX,
    LCY, LMUY, LEY, LKY, LHY, LVY, LKYC,
    LXAL, LYKA, LVYKA,
    PCX1, PDX1, PDX2, PDX3, PEX1, PEX2, PEX3, PEX4,
    PKX1, PKX2, PKX3, PHX1, PHX2, PVX1, PVX2,
    RBX1, RBX2, RBX3, RCX1, REX1, REX2, RHX1,
    PCY1, PDY1, PDY2, PDY3, PEY1, PEY2, PEY3, PEY4,
    PKY1, PKY2, PKY3, PHY1, PHY2, PHY3,
    PVY1, PVY2, PVY3, PVY4,
    RBY1, RBY2, RBY3, RBY4, RCY1, REY1, REY2, RHY1, RHY2,
    RVY1, RVY2, RVY3, RVY4, RVY5, RVY6,
) = range(len(MF2006_NAMES))

_SCALING = ("LFZO", "LCX", "LMUX", "LEX", "LKX", "LHX", "LVX", "LCY", "LMUY", "LEY",
            "LKY", "LHY", "LVY", "LKYC", "LXAL", "LYKA", "LVYKA")

# Degressive friction factor used for the vertical shifts.
A_MU = 10.0
EPS = 1e-6
# Below this speed the relaxation rate is frozen.
RELAXATION_SPEED_FLOOR = 1.0

TIRE_MF2006 = 0
TIRE_MF_SIMPLE = 1
TIRE_LINEAR = 2


@dataclass(frozen=True)
class SlipState:
    kappa: float = 0.0
    alpha: float = 0.0
    gamma: float = 0.0


@dataclass(frozen=True)
class MF2006Parameters:
    """Full Magic Formula coefficient set, stored as a flat float array.

    Index with the coefficient name, e.g. ``p["PDY1"]``. Missing scaling
    factors default to one, missing coefficients to zero.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (len(MF2006_NAMES),):
            raise ConfigurationError(f"expected {len(MF2006_NAMES)} coefficients, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __getitem__(self, name):
        return float(self.values[MF2006_NAMES.index(name)])

    def __eq__(self, other):
        return isinstance(other, MF2006Parameters) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    @classmethod
    def from_mapping(cls, mapping):
        unknown = set(mapping) - set(MF2006_NAMES)
        if unknown:
            raise ConfigurationError(f"unknown tire coefficients: {sorted(unknown)}")
        v = np.zeros(len(MF2006_NAMES))
        for name in _SCALING:
            v[MF2006_NAMES.index(name)] = 1.0
        for name, value in mapping.items():
            v[MF2006_NAMES.index(name)] = float(value)
        p = cls(v)
        p.validate()
        return p

    def to_mapping(self):
        return {n: float(x) for n, x in zip(MF2006_NAMES, self.values)}

    def replace(self, **changes):
        m = self.to_mapping()
        m.update(changes)
        return MF2006Parameters.from_mapping(m)

    def scaled(self, **factors):
        """Multiply named coefficients (typically scaling factors) by factors."""
        return self.replace(**{k: self[k] * f for k, f in factors.items()})

    def validate(self, load_range=None):
        if not self["FNOMIN"] > 0:
            raise ConfigurationError("FNOMIN must be positive")
        for name in ("PCX1", "PCY1"):
            if not self[name] * self["LCX" if name == "PCX1" else "LCY"] > 1.0:
                raise ConfigurationError(f"shape factor {name} must exceed 1")
        lo, hi = load_range or (0.2 * self["FNOMIN"], 3.0 * self["FNOMIN"])
        for fz in np.linspace(lo, hi, 9):
            # only the peaks are checked here; a bad stiffness surfaces at evaluation
            with np.errstate(all="ignore"):
                c = pure_slip_coefficients(fz, self)
            if not (c["lon"][2] > 0 and c["lat"][2] > 0):
                raise ConfigurationError(f"peak factor not positive at Fz={fz:.0f} N")


@dataclass(frozen=True)
class MFSimpleParameters:
    """Four-coefficient Magic Formula per direction, (B, C, D, E)."""

    lon: tuple
    lat: tuple

    def __post_init__(self):
        for name, q in (("lon", self.lon), ("lat", self.lat)):
            B, C, D, E = (float(v) for v in q)
            if not (B > 0 and C > 1 and D > 0 and E <= 1):
                raise ConfigurationError(f"invalid simple magic formula {name} coefficients {q}")
            object.__setattr__(self, name, (B, C, D, E))


@dataclass(frozen=True)
class LinearTireParameters:
    c_alpha: float
    c_kappa: float

    def __post_init__(self):
        if not (self.c_alpha > 0 and self.c_kappa > 0):
            raise ConfigurationError("linear tire stiffnesses must be positive")


@dataclass(frozen=True)
class TireLagState:
    kappa: float = 0.0
    alpha: float = 0.0


@dataclass(frozen=True)
class RelaxationLengths:
    kappa: float = 0.2
    alpha: float = 0.5

    def __post_init__(self):
        if not (self.kappa > 0 and self.alpha > 0):
            raise ConfigurationError("relaxation lengths must be positive")


@dataclass(frozen=True)
class TireVertical:
    spring_rate: float
    unloaded_radius: float

    def __post_init__(self):
        if not self.spring_rate > 0:
            raise ConfigurationError("tire spring rate must be positive")
        if not self.unloaded_radius > 0:
            raise ConfigurationError("unloaded radius must be positive")


# --------------------------------------------------------------------------
# kernels


@njit(cache=True)
def magic_formula(x, B, C, D, E):
    bx = B * x
    return D * math.sin(C * math.atan(bx - E * (bx - math.atan(bx))))


@njit(cache=True)
def _sign(x):
    if x > 0.0:
        return 1.0
    if x < 0.0:
        return -1.0
    return 0.0


@njit(cache=True)
def _weight(x, B, C, E, shift):
    bx = B * x
    bs = B * shift
    num = math.cos(C * math.atan(bx - E * (bx - math.atan(bx))))
    den = math.cos(C * math.atan(bs - E * (bs - math.atan(bs))))
    return num / den


@njit(cache=True)
def _lambda_prime(lam):
    return A_MU * lam / (1.0 + (A_MU - 1.0) * lam)


@njit(cache=True)
def mf2006_kernel(kappa, alpha, gamma, fz, c):
    """Combined-slip (Fx, Fy) in the wheel frame for load ``fz``."""
    if fz <= 0.0:
        return 0.0, 0.0
    fz0 = c[FNOMIN] * c[LFZO]
    dfz = (fz - fz0) / fz0
    g2 = gamma * gamma

    # pure longitudinal slip
    shx = (c[PHX1] + c[PHX2] * dfz) * c[LHX]
    kx = kappa + shx
    cx = c[PCX1] * c[LCX]
    mux = (c[PDX1] + c[PDX2] * dfz) * (1.0 - c[PDX3] * g2) * c[LMUX]
    dx = mux * fz
    ex = (c[PEX1] + c[PEX2] * dfz + c[PEX3] * dfz * dfz) * (1.0 - c[PEX4] * _sign(kx)) * c[LEX]
    if ex > 1.0:
        ex = 1.0
    kxk = fz * (c[PKX1] + c[PKX2] * dfz) * math.exp(c[PKX3] * dfz) * c[LKX]
    bx = kxk / (cx * dx + EPS)
    svx = fz * (c[PVX1] + c[PVX2] * dfz) * c[LVX] * _lambda_prime(c[LMUX])
    fx0 = magic_formula(kx, bx, cx, dx, ex) + svx

    # pure lateral slip
    shy = (c[PHY1] + c[PHY2] * dfz) * c[LHY] + c[PHY3] * gamma * c[LKYC]
    ay = alpha + shy
    cy = c[PCY1] * c[LCY]
    muy = (c[PDY1] + c[PDY2] * dfz) * (1.0 - c[PDY3] * g2) * c[LMUY]
    dy = muy * fz
    ey = (c[PEY1] + c[PEY2] * dfz) * (1.0 - (c[PEY3] + c[PEY4] * gamma) * _sign(ay)) * c[LEY]
    if ey > 1.0:
        ey = 1.0
    kya = (c[PKY1] * fz0 * math.sin(2.0 * math.atan(fz / (c[PKY2] * fz0)))
           * (1.0 - c[PKY3] * abs(gamma)) * c[LKY])
    by = kya / (cy * dy + EPS)
    svy = fz * ((c[PVY1] + c[PVY2] * dfz) * c[LVY]
                + (c[PVY3] + c[PVY4] * dfz) * gamma * c[LKYC]) * _lambda_prime(c[LMUY])
    fy0 = magic_formula(ay, by, cy, dy, ey) + svy

    # combined slip
    shxa = c[RHX1]
    bxa = (c[RBX1] + c[RBX3] * g2) * math.cos(math.atan(c[RBX2] * kappa)) * c[LXAL]
    exa = c[REX1] + c[REX2] * dfz
    if exa > 1.0:
        exa = 1.0
    fx = _weight(alpha + shxa, bxa, c[RCX1], exa, shxa) * fx0

    shyk = c[RHY1] + c[RHY2] * dfz
    byk = (c[RBY1] + c[RBY4] * g2) * math.cos(math.atan(c[RBY2] * (alpha - c[RBY3]))) * c[LYKA]
    eyk = c[REY1] + c[REY2] * dfz
    if eyk > 1.0:
        eyk = 1.0
    dvyk = muy * fz * (c[RVY1] + c[RVY2] * dfz + c[RVY3] * gamma) * math.cos(math.atan(c[RVY4] * alpha))
    svyk = dvyk * math.sin(c[RVY5] * math.atan(c[RVY6] * kappa)) * c[LVYKA]
    fy = _weight(kappa + shyk, byk, c[RCY1], eyk, shyk) * fy0 + svyk
    return fx, fy


@njit(cache=True)
def mf_simple_kernel(kappa, alpha, lon, lat):
    fx = magic_formula(kappa, lon[0], lon[1], lon[2], lon[3])
    fy = magic_formula(alpha, lat[0], lat[1], lat[2], lat[3])
    return fx, fy


@njit(cache=True)
def lag_rate(v_x, sigma):
    v = abs(v_x)
    if v < RELAXATION_SPEED_FLOOR:
        v = RELAXATION_SPEED_FLOOR
    return v / sigma


@njit(cache=True)
def vertical_force_kernel(penetration, rate):
    f = rate * penetration
    return f if f > 0.0 else 0.0


# --------------------------------------------------------------------------
# public operations


def pure_slip_coefficients(fz, p):
    """Load-evaluated (B, C, D, E) of the pure-slip curves at zero camber.

    Returns ``{"lon": (B, C, D, E), "lat": (...), "stiffness": (Kx, Ky),
    "shifts": (SHx, SVx, SHy, SVy)}``. Positive-slip branch for the
    sign-dependent curvature terms.
    """
    c = p.values
    fz0 = c[FNOMIN] * c[LFZO]
    dfz = (fz - fz0) / fz0
    cx = c[PCX1] * c[LCX]
    dx = (c[PDX1] + c[PDX2] * dfz) * c[LMUX] * fz
    ex = min(1.0, (c[PEX1] + c[PEX2] * dfz + c[PEX3] * dfz**2) * (1.0 - c[PEX4]) * c[LEX])
    kx = fz * (c[PKX1] + c[PKX2] * dfz) * math.exp(c[PKX3] * dfz) * c[LKX]
    cy = c[PCY1] * c[LCY]
    dy = (c[PDY1] + c[PDY2] * dfz) * c[LMUY] * fz
    ey = min(1.0, (c[PEY1] + c[PEY2] * dfz) * (1.0 - c[PEY3]) * c[LEY])
    ky = c[PKY1] * fz0 * math.sin(2.0 * math.atan(fz / (c[PKY2] * fz0))) * c[LKY]
    shx = (c[PHX1] + c[PHX2] * dfz) * c[LHX]
    svx = fz * (c[PVX1] + c[PVX2] * dfz) * c[LVX] * _lambda_prime(c[LMUX])
    shy = (c[PHY1] + c[PHY2] * dfz) * c[LHY]
    svy = fz * (c[PVY1] + c[PVY2] * dfz) * c[LVY] * _lambda_prime(c[LMUY])
    return {
        "lon": (kx / (cx * dx + EPS), cx, dx, ex),
        "lat": (ky / (cy * dy + EPS), cy, dy, ey),
        "stiffness": (kx, ky),
        "shifts": (shx, svx, shy, svy),
    }


def _diagnose(fz, p):
    """Name the coefficient block responsible for a non-finite evaluation."""
    with np.errstate(all="ignore"):
        c = pure_slip_coefficients(fz, p)
    suspects = {
        "lon": ("PKX1", "PCX1", "PDX1", "PEX1"),
        "lat": ("PKY1", "PCY1", "PDY1", "PEY1"),
    }
    for direction, names in suspects.items():
        for value, name in zip(c[direction], names):
            if not math.isfinite(value):
                return name
    if p["PKY2"] == 0.0:
        return "PKY2"
    return "RCX1" if not math.isfinite(p["RCX1"]) else "RCY1"


def mf2006_forces(slip, fz, p):
    """Combined-slip ``(Fx, Fy)`` of the full model in the tire frame."""
    if fz < 0:
        raise ValueError("vertical load must be non-negative")
    try:
        fx, fy = mf2006_kernel(slip.kappa, slip.alpha, slip.gamma, fz, p.values)
    except ZeroDivisionError:
        raise TireModelError(_diagnose(fz, p)) from None
    if not (math.isfinite(fx) and math.isfinite(fy)):
        raise TireModelError(_diagnose(fz, p))
    return fx, fy


def mf_simple_forces(slip, p):
    """Independent four-coefficient curves per direction. Camber is ignored."""
    return mf_simple_kernel(slip.kappa, slip.alpha, np.array(p.lon), np.array(p.lat))


def linear_tire_forces(slip, p):
    return p.c_kappa * slip.kappa, p.c_alpha * slip.alpha


def fit_simple_from_full(p, fz_median):
    """Identify the simple model at one load.

    At a fixed load and zero camber each pure-slip curve of the full model is
    itself a four-coefficient curve, so the identification is exact: the peak
    ``D``, the zero-slip stiffness ``B*C*D``, the asymptote through ``C`` and the
    peak position through ``E`` all coincide with the full model. Shifts are
    dropped since the simple model has none.
    """
    if not fz_median > 0:
        raise FitError("fit load must be positive")
    c = pure_slip_coefficients(fz_median, p)
    for direction in ("lon", "lat"):
        B, C, D, E = c[direction]
        if not D > 0 or not all(math.isfinite(v) for v in (B, C, D, E)):
            raise FitError(f"degenerate {direction} peak at Fz={fz_median:.0f} N")
    return MFSimpleParameters(lon=c["lon"], lat=c["lat"])


def linear_from_full(p, fz):
    """Linear model whose stiffnesses equal the full model's at zero slip."""
    kx, ky = pure_slip_coefficients(fz, p)["stiffness"]
    return LinearTireParameters(c_alpha=ky, c_kappa=kx)


def embed_simple(q, fz0=None):
    """Full-model coefficient set that reproduces ``q`` at its nominal load.

    Only used to check the identification round trip.
    """
    B, C, D, E = q.lat
    Bx, Cx, Dx, Ex = q.lon
    fz0 = fz0 or 4000.0
    return MF2006Parameters.from_mapping({
        "FNOMIN": fz0, "PKY2": 1.0,
        "PCX1": Cx, "PDX1": Dx / fz0, "PEX1": Ex, "PKX1": Bx * Cx * Dx / fz0,
        "PCY1": C, "PDY1": D / fz0, "PEY1": E, "PKY1": B * C * D / fz0,
        "RBX1": 10.0, "RCX1": 1.0, "RBY1": 10.0, "RCY1": 1.0,
    })


def tire_lag_derivative(lag, steady_slip, v_x, relaxation):
    """First-order transient slip, ``d/dt = |v_x| / sigma * (steady - lagged)``."""
    return TireLagState(
        kappa=lag_rate(v_x, relaxation.kappa) * (steady_slip.kappa - lag.kappa),
        alpha=lag_rate(v_x, relaxation.alpha) * (steady_slip.alpha - lag.alpha),
    )


def vertical_tire_force(penetration, p):
    """Spring force for a rim-to-road penetration; zero once the wheel lifts."""
    return vertical_force_kernel(penetration, p.spring_rate)


# --------------------------------------------------------------------------
# files


def load_tire_file(path):
    """Read a tire file. The ``model`` key selects the fidelity."""
    data = json.loads(Path(path).read_text())
    return tire_from_mapping(data)


def tire_from_mapping(data):
    kind = data.get("model")
    if kind == "mf2006":
        return MF2006Parameters.from_mapping(data["coefficients"])
    if kind == "mf_simple":
        return MFSimpleParameters(lon=tuple(data["lon"]), lat=tuple(data["lat"]))
    if kind == "linear":
        return LinearTireParameters(c_alpha=data["c_alpha"], c_kappa=data["c_kappa"])
    raise ConfigurationError(f"unknown tire model {kind!r}")


def tire_to_mapping(p):
    if isinstance(p, MF2006Parameters):
        return {"model": "mf2006", "coefficients": p.to_mapping()}
    if isinstance(p, MFSimpleParameters):
        return {"model": "mf_simple", "lon": list(p.lon), "lat": list(p.lat)}
    if isinstance(p, LinearTireParameters):
        return {"model": "linear", "c_alpha": p.c_alpha, "c_kappa": p.c_kappa}
    raise TypeError(type(p))
