"""Closed-loop harness: sensing, estimation, control and the run loop."""
from .control import ControllerConfig, lateral_control, longitudinal_control, low_level
from .reference import ReferenceLap, load_lap, peak_lateral_acceleration, scale_velocity_profile
from .runner import LoopConfig, RunResult, RunTrace, run_closed_loop
from .sensing import LowPassEstimator, SensorConfig, estimate, sense

__all__ = [
    "ControllerConfig", "LoopConfig", "LowPassEstimator", "ReferenceLap", "RunResult", "RunTrace",
    "SensorConfig", "estimate", "lateral_control", "load_lap", "longitudinal_control", "low_level",
    "peak_lateral_acceleration", "run_closed_loop", "scale_velocity_profile", "sense",
]
