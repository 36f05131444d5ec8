"""Exception types shared across the package."""


class LagwalkError(Exception):
    """Base class for all lagwalk errors."""


class ConfigError(LagwalkError):
    """Invalid configuration value or combination."""


class NonErgodicError(LagwalkError):
    """Walk configuration cannot leave the current state (jump rate 0 at a sink)."""


class StateSpaceError(LagwalkError):
    """Pair-state space exceeds the configured memory cap."""


class ConvergenceError(LagwalkError):
    """Iterative stationary solver did not reach tolerance within the cap."""

    def __init__(self, message: str, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class SequenceUnreachableError(LagwalkError):
    """A sequence contains a transition of probability zero (possible only when r = 0)."""


class UnobservedEntryError(LagwalkError):
    """Query touches a part of the graph that the walk has not observed."""


class Es3CoverageError(LagwalkError):
    """Probability-proportional weights need every equivalent sequence inside the seed sample."""


class NoCollisionsError(LagwalkError):
    """Capture-recapture estimate undefined because the two walks never collided."""


class NoObservationsError(LagwalkError):
    """No window of the trace revealed any motif occurrence."""


class EstimationError(LagwalkError):
    """Estimator input is degenerate (for example a zero denominator)."""


class ObservationFailureError(LagwalkError):
    """Replicate failure rate exceeded the configured threshold."""

    def __init__(self, message: str, rate: float, threshold: float):
        super().__init__(message)
        self.rate = rate
        self.threshold = threshold
