"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line front end can map
failures to distinct, stable process exit statuses.
"""


class BoxJenkinsError(Exception):
    exit_code = 1

    @property
    def kind(self) -> str:
        return type(self).__name__


class ParseError(BoxJenkinsError, ValueError):
    exit_code = 10


class GapError(BoxJenkinsError, ValueError):
    exit_code = 11


class BoundsError(BoxJenkinsError, ValueError):
    exit_code = 12


class DomainError(BoxJenkinsError, ValueError):
    exit_code = 13


class LengthError(BoxJenkinsError, ValueError):
    exit_code = 14


class StateError(BoxJenkinsError, RuntimeError):
    exit_code = 15


class ZeroVarianceError(BoxJenkinsError, ValueError):
    exit_code = 16


class NumericalError(BoxJenkinsError, ArithmeticError):
    exit_code = 17


class ConfigError(BoxJenkinsError, ValueError):
    exit_code = 18


class RankError(BoxJenkinsError, ValueError):
    exit_code = 19


class DfError(BoxJenkinsError, ValueError):
    exit_code = 20


class SizeError(BoxJenkinsError, ValueError):
    exit_code = 21


class DegeneracyError(BoxJenkinsError, ValueError):
    exit_code = 22


class TransformError(BoxJenkinsError, ValueError):
    exit_code = 23


class FitError(BoxJenkinsError, RuntimeError):
    """Optimizer gave up. ``best`` holds the best-so-far fit, if any."""

    exit_code = 24

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class SelectionError(BoxJenkinsError, RuntimeError):
    exit_code = 25
