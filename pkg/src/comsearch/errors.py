"""Exception and warning types raised across the package."""


class CommunitySearchError(Exception):
    """Base class for errors raised by this package."""


class ParameterError(CommunitySearchError, ValueError):
    pass


class ParseError(CommunitySearchError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionError(CommunitySearchError, ValueError):
    pass


class NumericError(CommunitySearchError, ArithmeticError):
    pass


class SingularWhitening(NumericError):
    """A rank-k moment matrix has a (near) zero k-th singular value."""


class DegenerateProjection(NumericError):
    """The projection of the mean vector onto the leading direction is zero."""


class DegenerateThreshold(CommunitySearchError, ValueError):
    pass


class EmptyEstimate(CommunitySearchError):
    pass


class SelfLoopWarning(UserWarning):
    pass


class DegenerateWeights(UserWarning):
    pass


class RefinementSkipped(UserWarning):
    pass


class RankDeficient(UserWarning):
    pass


class DatasetWarning(UserWarning):
    pass
