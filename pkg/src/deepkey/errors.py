"""Exception hierarchy shared across the package."""


class DeepkeyError(Exception):
    """Base class for all package errors."""


class ParameterError(DeepkeyError, ValueError):
    """Invalid argument value (band edges, k <= 0, bad shapes, ...)."""


class DataError(DeepkeyError, ValueError):
    """Input data violates an invariant (non-finite values, wrong layout)."""


class NumericError(DeepkeyError, ArithmeticError):
    """A computation produced non-finite values; message names the tensor."""


class ConfigError(DeepkeyError, ValueError):
    """Invalid or inconsistent configuration."""


class TrainingError(DeepkeyError, RuntimeError):
    """Training cannot proceed (degenerate data, single class, ...)."""


class RequestError(DeepkeyError, ValueError):
    """Malformed authentication request; distinct from a Deny decision."""
