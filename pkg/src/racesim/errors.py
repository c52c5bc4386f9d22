"""Exception types raised across the simulator."""


class SimulationError(Exception):
    """Base class for all simulator faults."""


class ConfigurationError(SimulationError):
    """Invalid or inconsistent parameters, maps or experiment configs."""


class IntegrationFault(SimulationError):
    """A non-finite derivative was produced inside a Runge-Kutta stage."""

    def __init__(self, stage, time=None, message=None):
        self.stage = stage
        self.time = time
        if message is None:
            message = f"non-finite derivative in stage {stage}"
            if time is not None:
                message += f" at t={time:.6f} s"
        super().__init__(message)


class TireModelError(SimulationError):
    """Tire parameters produced a non-finite intermediate value."""

    def __init__(self, coefficient, message=None):
        self.coefficient = coefficient
        super().__init__(message or f"non-finite tire force, check coefficient {coefficient}")


class FitError(SimulationError):
    """The simplified tire model could not be identified from the full model."""


class ModelFault(SimulationError):
    """The vehicle model produced non-finite values for a given state."""

    def __init__(self, message, state=None):
        self.state = state
        super().__init__(message)


class OffTrackError(SimulationError):
    """A position left the corridor around the track centerline."""

    def __init__(self, distance, corridor):
        self.distance = distance
        self.corridor = corridor
        super().__init__(f"{distance:.2f} m from centerline exceeds corridor of {corridor:.2f} m")


class MetricError(SimulationError):
    """Traces cannot be compared or reduced to a metric."""


class GenerationError(SimulationError):
    """A track or lap generator spec is infeasible."""
