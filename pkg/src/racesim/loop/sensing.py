"""Virtual sensors with seeded Gaussian noise and a low-pass state estimator."""
import math
from dataclasses import dataclass

import numpy as np

# measurement channel order
CHANNELS = ("x", "y", "yaw", "vx", "vy", "yaw_rate", "ax", "ay")
X, Y, YAW, VX, VY, YAW_RATE, AX, AY = range(len(CHANNELS))


@dataclass(frozen=True)
class SensorConfig:
    std_position: float = 0.02
    std_velocity: float = 0.05
    std_yaw: float = 0.002
    std_yaw_rate: float = 0.005
    std_accel: float = 0.1
    enabled: bool = False

    def __post_init__(self):
        if min(self.std_position, self.std_velocity, self.std_yaw, self.std_yaw_rate, self.std_accel) < 0:
            raise ValueError("noise standard deviations must be non-negative")

    def std_vector(self):
        p, v, a = self.std_position, self.std_velocity, self.std_accel
        return np.array([p, p, self.std_yaw, v, v, self.std_yaw_rate, a, a])


def sense(truth, cfg, rng):
    """Measurement of the true channel vector ``truth`` (order ``CHANNELS``)."""
    truth = np.asarray(truth, dtype=float)
    if not cfg.enabled:
        return truth.copy()
    return truth + cfg.std_vector() * rng.standard_normal(truth.shape)


def make_rng(seed):
    return np.random.default_rng(seed)


class LowPassEstimator:
    """Per-channel single-pole low-pass, exact for held samples.

    A cutoff of ``inf`` passes measurements through unchanged. The first
    sample initialises the filter state.
    """

    def __init__(self, cutoff_hz, dt):
        cutoff = np.broadcast_to(np.asarray(cutoff_hz, dtype=float), (len(CHANNELS),))
        if np.any(cutoff <= 0) or not dt > 0:
            raise ValueError("cutoff frequencies and sample time must be positive")
        self.gain = np.where(np.isinf(cutoff), 1.0, 1.0 - np.exp(-2.0 * math.pi * cutoff * dt))
        self.state = None

    def update(self, measurement):
        m = np.asarray(measurement, dtype=float)
        if self.state is None:
            self.state = m.copy()
        else:
            self.state = self.state + self.gain * (m - self.state)
        return self.state.copy()


def noise_reduction_factor(gain):
    """Ratio of output to input noise standard deviation for white input."""
    return math.sqrt(gain / (2.0 - gain))


def estimate(measurement, estimator=None):
    """Filtered estimate; without an estimator the measurement passes through."""
    if estimator is None:
        return np.asarray(measurement, dtype=float).copy()
    return estimator.update(measurement)
