"""Track centerline, curvilinear projection and the forces the track exerts.

Conventions: ``d`` is positive to the left of the driving direction. A
positive bank angle raises the right-hand edge, which is the usual banking of
a left-hand (counter-clockwise) turn; gravity then pulls the car left, toward
the turn centre. A positive slope climbs in the driving direction.
"""
import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .chassis import G
from .errors import ConfigurationError, OffTrackError

CSV_COLUMNS = ("s_m", "x_m", "y_m", "z_m", "psi_rad", "kappa_radpm", "bank_rad", "slope_rad")
DEFAULT_CORRIDOR = 15.0
MAX_SPACING = 2.0
# segments searched on either side of the hint before falling back to a global search
SEARCH_WINDOW = 10


def wrap_angle(a):
    return (a + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class CurvilinearPose:
    s: float
    d: float
    heading: float = 0.0


@dataclass(frozen=True, eq=False)
class TrackCenterline:
    """Piecewise-linear centerline. Closed tracks repeat the first point at ``s_max``."""

    s: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    heading: np.ndarray
    curvature: np.ndarray
    bank: np.ndarray
    slope: np.ndarray
    closed: bool = True
    name: str = ""

    def __post_init__(self):
        n = len(self.s)
        for ch in CHANNELS:
            v = np.asarray(getattr(self, ch), dtype=float)
            if v.shape != (n,):
                raise ConfigurationError(f"track channel {ch} has {v.shape}, expected ({n},)")
            if not np.all(np.isfinite(v)):
                raise ConfigurationError(f"track channel {ch} contains non-finite values")
            v.setflags(write=False)
            object.__setattr__(self, ch, v)
        if n < 3:
            raise ConfigurationError("a track needs at least three samples")
        if np.any(np.diff(self.s) <= 0):
            raise ConfigurationError("track arc length must be strictly increasing")
        if self.closed:
            gap = math.hypot(self.x[-1] - self.x[0], self.y[-1] - self.y[0])
            if gap > 1e-6:
                raise ConfigurationError(f"closed track does not close, seam gap {gap:.3g} m")
        # unit tangents and chord lengths; s need not equal the chord length
        chord = np.hypot(np.diff(self.x), np.diff(self.y))
        if np.any(chord <= 0):
            raise ConfigurationError("track has repeated points")
        object.__setattr__(self, "_chord", chord)
        object.__setattr__(self, "_tx", np.diff(self.x) / chord)
        object.__setattr__(self, "_ty", np.diff(self.y) / chord)

    @property
    def s_max(self):
        return float(self.s[-1])

    @property
    def n_segments(self):
        return len(self.s) - 1

    def wrap(self, s):
        return np.mod(s, self.s_max) if self.closed else np.clip(s, 0.0, self.s_max)

    def sample(self, s, channel):
        """Linear interpolation of one channel at arc position(s) ``s``."""
        return np.interp(self.wrap(s), self.s, getattr(self, channel))

    def heading_at(self, s):
        return self.sample(s, "heading")

    def point_at(self, s, d=0.0):
        """Planar point at arc position ``s`` and lateral offset ``d``."""
        s = self.wrap(s)
        i = int(np.clip(np.searchsorted(self.s, s, side="right") - 1, 0, self.n_segments - 1))
        t = (s - self.s[i]) / (self.s[i + 1] - self.s[i])
        px = self.x[i] + t * (self.x[i + 1] - self.x[i])
        py = self.y[i] + t * (self.y[i + 1] - self.y[i])
        return px - d * self._ty[i], py + d * self._tx[i]

    def curvature_consistency(self):
        """Largest mismatch between the curvature channel and d(heading)/ds,
        relative to the peak curvature."""
        k_fd = np.gradient(self.heading, self.s)
        scale = max(float(np.max(np.abs(self.curvature))), 1e-12)
        return float(np.max(np.abs(k_fd - self.curvature))) / scale

    def to_csv(self, path):
        path = Path(path)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for row in zip(*(getattr(self, ch) for ch in CHANNELS)):
                w.writerow([repr(float(v)) for v in row])
        meta = {"closed": self.closed, "name": self.name}
        meta_path(path).write_text(json.dumps(meta, indent=2))

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != CSV_COLUMNS:
                raise ConfigurationError(f"unexpected track header {header}")
            try:
                data = np.array([[float(v) for v in row] for row in reader if row])
            except ValueError as exc:
                raise ConfigurationError(f"malformed track file {path}: {exc}") from None
        mp = meta_path(path)
        meta = json.loads(mp.read_text()) if mp.exists() else {}
        return cls(*data.T, closed=bool(meta.get("closed", True)), name=meta.get("name", path.stem))


CHANNELS = ("s", "x", "y", "z", "heading", "curvature", "bank", "slope")


def meta_path(path):
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def load_track(path):
    return TrackCenterline.from_csv(path)


def _foot_points(track, idx, px, py):
    ax = track.x[idx]
    ay = track.y[idx]
    length = track._chord[idx]
    tx = track._tx[idx]
    ty = track._ty[idx]
    t = np.clip(((px - ax) * tx + (py - ay) * ty) / length, 0.0, 1.0)
    fx = ax + t * length * tx
    fy = ay + t * length * ty
    dist2 = (px - fx) ** 2 + (py - fy) ** 2
    return t, dist2


def project(position, track, hint_s=None, heading=None, corridor=DEFAULT_CORRIDOR):
    """Foot point of ``position`` on the centerline.

    The search covers a few segments around ``hint_s``; without a hint, or if
    the local minimum sits on the window edge, every segment is searched.
    ``heading`` (world yaw) yields the relative heading of the pose.
    """
    px, py = float(position[0]), float(position[1])
    n = track.n_segments
    idx = None
    if hint_s is not None:
        h = int(np.searchsorted(track.s, track.wrap(hint_s), side="right")) - 1
        offsets = np.arange(-SEARCH_WINDOW, SEARCH_WINDOW + 1)
        if track.closed:
            idx = np.mod(h + offsets, n)
        else:
            idx = np.unique(np.clip(h + offsets, 0, n - 1))
        t, dist2 = _foot_points(track, idx, px, py)
        k = int(np.argmin(dist2))
        on_edge = (k == 0 and t[k] == 0.0) or (k == len(idx) - 1 and t[k] == 1.0)
        if on_edge or dist2[k] > corridor**2:
            idx = None
    if idx is None:
        idx = np.arange(n)
        t, dist2 = _foot_points(track, idx, px, py)
        k = int(np.argmin(dist2))
    i = int(idx[k])
    ds = track.s[i + 1] - track.s[i]
    s = track.s[i] + t[k] * ds
    cross = track._tx[i] * (py - track.y[i]) - track._ty[i] * (px - track.x[i])
    d = math.copysign(math.sqrt(dist2[k]), cross) if dist2[k] > 0 else 0.0
    if abs(d) > corridor:
        raise OffTrackError(abs(d), corridor)
    if track.closed and s >= track.s_max:
        s -= track.s_max
    rel = 0.0 if heading is None else wrap_angle(heading - float(track.heading_at(s)))
    return CurvilinearPose(s=float(s), d=float(d), heading=rel)


def external_wrench(pose, v, mass, track):
    """Gravity components of a banked, sloped surface as a body-axis force.

    Returns ``(Fx, Fy, Fz)``. ``Fz`` is the upward correction for the reduced
    normal component of gravity, so a flat track returns zeros. The force acts
    at the CoG. ``v`` is accepted for interface symmetry and unused.
    """
    bank = float(track.sample(pose.s, "bank"))
    slope = float(track.sample(pose.s, "slope"))
    w = mass * G
    f_s = -w * math.sin(slope)
    f_d = w * math.sin(bank)
    c = math.cos(pose.heading)
    sn = math.sin(pose.heading)
    return (f_s * c + f_d * sn, -f_s * sn + f_d * c, w * (1.0 - math.cos(bank) * math.cos(slope)))


@dataclass(frozen=True)
class Pose3D:
    x: float
    y: float
    z: float
    roll: float
    pitch: float
    yaw: float


def lift_to_3d(x, y, yaw, track, hint_s=None, body=(0.0, 0.0, 0.0), corridor=DEFAULT_CORRIDOR):
    """Place a planar pose on the track surface.

    Height and attitude follow the surface at the projected ``(s, d)``; the
    body's own heave, roll and pitch from ``body`` are added on top. Angles
    are ISO (roll positive left side up, pitch positive nose down).
    """
    pose = project((x, y), track, hint_s=hint_s, heading=yaw, corridor=corridor)
    bank = float(track.sample(pose.s, "bank"))
    slope = float(track.sample(pose.s, "slope"))
    z = float(track.sample(pose.s, "z")) - pose.d * math.sin(bank)
    c = math.cos(pose.heading)
    sn = math.sin(pose.heading)
    roll = -(bank * c + slope * sn)
    pitch = -(slope * c - bank * sn)
    return Pose3D(x, y, z + body[0], roll + body[1], pitch + body[2], yaw), pose
