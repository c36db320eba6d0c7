"""Exception hierarchy shared across the package."""


class NprLabError(Exception):
    """Base class for all errors raised by nprlab."""


class ConfigError(NprLabError, ValueError):
    """Invalid experiment or policy configuration."""


# linalg
class NotPositiveDefinite(NprLabError, ValueError):
    pass


class NegativeQuadraticForm(NprLabError, ValueError):
    pass


class NoConvergence(NprLabError, RuntimeError):
    pass


# neural
class OddDimension(NprLabError, ValueError):
    pass


class DimensionMismatch(NprLabError, ValueError):
    pass


class DivergedLoss(NprLabError, RuntimeError):
    """Training objective blew past the divergence threshold; usually a step size that is too large."""


# policies
class EmptyCandidates(NprLabError, ValueError):
    pass


# environments
class BadClassIndex(NprLabError, ValueError):
    pass


class ZeroVector(NprLabError, ValueError):
    pass


class ParseError(NprLabError, ValueError):
    def __init__(self, message, row=None, column=None):
        loc = []
        if row is not None:
            loc.append(f"row {row}")
        if column is not None:
            loc.append(f"column {column!r}")
        super().__init__(f"{message} ({', '.join(loc)})" if loc else message)
        self.row = row
        self.column = column


class MissingLabelColumn(NprLabError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else "missing label column"


class ChecksumMismatch(NprLabError, OSError):
    pass


# ntk
class NonUnitContext(NprLabError, ValueError):
    pass


class DegenerateWarmup(NprLabError, ValueError):
    pass


class PotentialBoundViolation(NprLabError, AssertionError):
    """The elliptical-potential sum exceeded its log-determinant bound. Always a bug."""
