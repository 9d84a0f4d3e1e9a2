"""Exception hierarchy shared by all modules."""

from __future__ import annotations

__all__ = [
    "PowerDecayError",
    "InvalidArgumentError",
    "DegreeMismatchError",
    "PositivityViolationError",
    "NotPositiveDefiniteError",
    "DecompositionMismatchError",
    "StateError",
    "AccuracyError",
    "IntegrationError",
    "StiffnessError",
    "DivergenceError",
    "TrivialSolutionError",
    "InsufficientDataError",
    "AmbiguousLimitError",
    "NonConvergenceError",
    "RateIndeterminateError",
    "ScenarioParseError",
    "AssumptionError",
]


class PowerDecayError(Exception):
    """Base class for every error raised by the package."""


class InvalidArgumentError(PowerDecayError, ValueError):
    pass


class DegreeMismatchError(InvalidArgumentError):
    pass


class PositivityViolationError(PowerDecayError):
    """H is not strictly positive at some point of the unit sphere."""

    def __init__(self, message, witness=None, value=None):
        super().__init__(message)
        self.witness = witness
        self.value = value


class NotPositiveDefiniteError(PowerDecayError):
    pass


class DecompositionMismatchError(PowerDecayError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class StateError(PowerDecayError):
    pass


class AccuracyError(PowerDecayError):
    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class IntegrationError(PowerDecayError):
    """Base for integrator failures; carries the partial trajectory when available."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


class StiffnessError(IntegrationError):
    pass


class DivergenceError(IntegrationError):
    pass


class TrivialSolutionError(IntegrationError):
    pass


class InsufficientDataError(PowerDecayError):
    pass


class AmbiguousLimitError(PowerDecayError):
    def __init__(self, message, Lambda_hat=None, nearest=None, gap=None):
        super().__init__(message)
        self.Lambda_hat = Lambda_hat
        self.nearest = nearest
        self.gap = gap


class NonConvergenceError(PowerDecayError):
    pass


class RateIndeterminateError(PowerDecayError):
    """The residual sits at round-off level; only a lower bound on the rate is known."""

    def __init__(self, message, lower_bound=0.0):
        super().__init__(message)
        self.lower_bound = lower_bound


class ScenarioParseError(PowerDecayError):
    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class AssumptionError(PowerDecayError):
    pass
