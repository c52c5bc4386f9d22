"""Lateral-error fidelity metrics on a common arc-length grid."""
import numpy as np

from .errors import MetricError

DEFAULT_SPACING = 0.5
DEFAULT_MAX_GAP = 20.0


def resample(s, d, s_max, spacing=DEFAULT_SPACING, max_gap=DEFAULT_MAX_GAP):
    """Linear interpolation of ``d(s)`` onto ``0, spacing, ..., s_max``.

    Values beyond the trace ends are clamped. Returns ``(grid, d_grid)``.
    """
    s = np.asarray(s, dtype=float)
    d = np.asarray(d, dtype=float)
    if not spacing > 0:
        raise MetricError("grid spacing must be positive")
    if s.size == 0:
        raise MetricError("empty trace")
    if np.any(np.diff(s) <= 0):
        raise MetricError("trace arc length must be strictly increasing")
    if s.size > 1 and np.max(np.diff(s)) > max_gap:
        raise MetricError(f"trace has a gap of {np.max(np.diff(s)):.1f} m")
    n = int(round(s_max / spacing))
    grid = np.linspace(0.0, n * spacing, n + 1)
    return grid, np.interp(grid, s, d)


def max_lateral_error(d):
    """Largest absolute lateral error over the samples."""
    d = np.asarray(d, dtype=float)
    if d.size == 0:
        raise MetricError("empty trace")
    return float(np.max(np.abs(d)))


def disparity(grid, d, grid_ref, d_ref):
    """Reference-weighted mean squared difference of two lateral-error traces (m^3).

    ``(1/s_max) * integral (d - d_ref)^2 * |d_ref| ds`` by the trapezoid rule.
    The weighting makes the measure asymmetric in its arguments.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.shape != np.shape(grid_ref) or not np.array_equal(grid, grid_ref):
        raise MetricError("traces are not on the same grid")
    if grid.size < 2:
        raise MetricError("grid needs at least two points")
    d = np.asarray(d, dtype=float)
    d_ref = np.asarray(d_ref, dtype=float)
    span = grid[-1] - grid[0]
    return float(np.trapezoid((d - d_ref) ** 2 * np.abs(d_ref), grid) / span)


def mean_lateral_error(grid, d):
    """Arc-length mean of ``|d|``. Diagnostic only, not an acceptance metric."""
    grid = np.asarray(grid, dtype=float)
    return float(np.trapezoid(np.abs(d), grid) / (grid[-1] - grid[0]))
