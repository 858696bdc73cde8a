"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class GtoError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class ConfigError(GtoError, ValueError):
    """Invalid user input: parameters, configs, expressions, lattice mismatch."""

    exit_code = 2


class InvariantViolation(GtoError):
    """A structural or physical invariant failed its tolerance."""

    exit_code = 1


class NumericalError(GtoError, RuntimeError):
    """An iterative routine failed to converge or an eigensolver broke down."""

    exit_code = 3
