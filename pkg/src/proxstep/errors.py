"""Exception types shared across the package."""


class ProxstepError(Exception):
    """Base class for all package errors."""


class ParameterError(ProxstepError, ValueError):
    """A parameter violates its documented domain (e.g. r <= 0)."""


class SetValuedCaseError(ProxstepError):
    """A single-valued force law was evaluated inside its set-valued case."""


class NumericalError(ProxstepError):
    """Singular matrix, non-finite state, or similar numerical breakdown."""


class EstimatorError(ProxstepError):
    """An impulse estimator (Newton/shooting iteration) failed to converge."""


class SingularConfigurationError(EstimatorError):
    """The impulse cannot influence the target coordinate at this configuration."""


class ScenarioError(ProxstepError, ValueError):
    """A scenario file failed validation."""
