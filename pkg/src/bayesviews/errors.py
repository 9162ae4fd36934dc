"""Exception hierarchy for bayesviews."""


class BayesViewsError(Exception):
    """Base class for every error raised by the package."""


class MarketDataError(BayesViewsError, ValueError):
    """A data file is malformed or a frame violates its invariants.

    ``path`` and ``line`` point at the offending input when known.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)


class MissingColumn(MarketDataError):
    pass


class UnknownTicker(MarketDataError):
    pass


class NonPositivePrice(MarketDataError):
    pass


class DuplicateDateTicker(MarketDataError):
    pass


class NoHistoricalValue(MarketDataError):
    pass


class EventOutOfRange(MarketDataError):
    pass


class InsufficientHistory(BayesViewsError, ValueError):
    pass


class ViewError(BayesViewsError, ValueError):
    pass


class DimensionMismatch(ViewError):
    pass


class NotSymmetric(ViewError):
    pass


class InvalidView(ViewError):
    """A row of P sums to neither 0 (relative) nor 1 (absolute)."""


class DependentViews(ViewError):
    pass


class SingularSystem(ViewError):
    pass


class AllocationError(BayesViewsError, ValueError):
    pass


class SingularCovariance(AllocationError):
    pass


class SingularPrecision(AllocationError):
    pass


class NonFiniteLoss(BayesViewsError, FloatingPointError):
    """Training diverged; the caller may reset optimizer accumulators."""


class NoRules(BayesViewsError, RuntimeError):
    pass


class MetricError(BayesViewsError, ValueError):
    pass


class LengthMismatch(MetricError):
    pass


class NonPositiveValue(MetricError):
    pass


class DegenerateVolatility(MetricError):
    pass


class ZeroTotalCap(BayesViewsError, ValueError):
    pass


class DateNotInRun(BayesViewsError, KeyError):
    pass
