"""Exception types raised across the package."""


class McdeError(Exception):
    """Base class for all package-specific errors."""


class EmptySample(McdeError):
    """Sample has too few points for the requested operation."""


class InvalidBandwidth(McdeError):
    """Bandwidth h must be strictly positive."""


class InvalidBias(McdeError):
    """Movement bias b must lie in [0, 1]."""


class ZeroRow(McdeError):
    """A sample point has zero total weight; h is too small for this kernel/sample."""


class DimensionMismatch(McdeError):
    """Input dimensionality is incompatible with the requested operation."""


class DegenerateDomain(McdeError):
    """Integration domain has zero volume."""


class ZeroDensityAtSamplePoint(McdeError):
    """Estimated density vanishes at a sample point; h is pathologically small."""


class AllGridPointsFailed(McdeError):
    """Every bandwidth grid point failed; no optimum can be selected."""


class SingularCovariance(McdeError):
    """Covariance matrix is (numerically) singular; data are degenerate or collinear."""


class PointBelowBoundary(McdeError):
    """Reflection requested at a boundary that some points violate."""


class DomainViolation(McdeError):
    """Variable transform applied outside its domain."""


class KOutOfRange(McdeError):
    """Neighbor count k must satisfy 1 <= k <= N - 1."""


class DegenerateLabels(McdeError):
    """AUC needs at least one positive and one negative label."""


class TooFewPoints(McdeError):
    """Not enough points for the requested number of folds."""


class InvalidParams(McdeError):
    """Distribution or configuration parameters outside their valid range."""


class ParseError(McdeError):
    """Malformed input file."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)
