"""
Errors

Exception types raised by the library and the exit codes the command line maps them to.
"""

from enum import Enum


class FdqeError(Exception):
    """
    Base class for all errors raised deliberately by this package.
    """


class ValidationError(FdqeError, ValueError):
    """
    Raised when an input (algebra, element, matrix, flag value) fails validation.
    """


class ConfigurationError(FdqeError):
    """
    Raised when an FDQE_* environment override cannot be parsed.
    """


class NonConvergenceError(FdqeError):
    """
    Raised in strict mode when an optimizer only produced an upper bound.
    """


class ExitCode(Enum):
    OK                  = 0
    USAGE               = 1
    NON_CONVERGENCE     = 2
