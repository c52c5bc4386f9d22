"""Reference laps: target lateral offset and speed over arc length."""
import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ..errors import ConfigurationError

CSV_COLUMNS = ("s_m", "d_m", "v_mps", "kappa_radpm", "ax_mps2")


@dataclass(frozen=True, eq=False)
class ReferenceLap:
    s: np.ndarray
    d: np.ndarray
    v: np.ndarray
    curvature: np.ndarray
    ax: np.ndarray
    name: str = ""

    def __post_init__(self):
        n = len(self.s)
        for ch in ("s", "d", "v", "curvature", "ax"):
            a = np.asarray(getattr(self, ch), dtype=float)
            if a.shape != (n,) or not np.all(np.isfinite(a)):
                raise ConfigurationError(f"reference lap channel {ch} is malformed")
            a.setflags(write=False)
            object.__setattr__(self, ch, a)
        if n < 2 or np.any(np.diff(self.s) <= 0):
            raise ConfigurationError("reference lap arc length must be strictly increasing")
        if np.any(self.v < 0):
            raise ConfigurationError("reference speeds must be non-negative")

    @property
    def s_max(self):
        return float(self.s[-1])

    def at(self, s):
        """(d, v, curvature, ax) at arc position ``s`` (wrapped onto the lap)."""
        s = np.mod(s, self.s_max)
        return tuple(np.interp(s, self.s, getattr(self, ch)) for ch in ("d", "v", "curvature", "ax"))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for row in zip(self.s, self.d, self.v, self.curvature, self.ax):
                w.writerow([repr(float(v)) for v in row])

    @classmethod
    def from_csv(cls, path):
        path = Path(path)
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = tuple(next(reader))
            if header != CSV_COLUMNS:
                raise ConfigurationError(f"unexpected reference lap header {header}")
            try:
                data = np.array([[float(v) for v in row] for row in reader if row])
            except ValueError as exc:
                raise ConfigurationError(f"malformed reference lap {path}: {exc}") from None
        return cls(*data.T, name=path.stem)


def load_lap(path):
    return ReferenceLap.from_csv(path)


def scale_velocity_profile(lap, factor):
    """Multiply target speeds by ``factor``; the path is untouched.

    The longitudinal acceleration target is scaled linearly with the factor
    although v*dv/ds of the scaled profile grows with its square. Lateral
    acceleration v^2*kappa scales with the square.
    """
    if not factor > 0:
        raise ValueError("scale factor must be positive")
    return replace(lap, v=lap.v * factor, ax=lap.ax * factor)


def peak_lateral_acceleration(lap):
    """Largest requested lateral acceleration, max of v^2 * |curvature|."""
    return float(np.max(lap.v**2 * np.abs(lap.curvature)))
