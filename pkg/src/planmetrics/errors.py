"""Exception hierarchy shared by all planmetrics modules."""


class PlanMetricsError(Exception):
    """Base class for all toolkit errors."""


class MalformedJson(PlanMetricsError):
    pass


class SchemaViolation(PlanMetricsError):
    pass


class UnknownCategory(PlanMetricsError):
    pass


class EmptyMask(PlanMetricsError):
    pass


class MissingMask(PlanMetricsError):
    pass


class EmptyImage(PlanMetricsError):
    pass


class BadGridSize(PlanMetricsError):
    pass


class DimensionMismatch(PlanMetricsError):
    pass


class TooFewSamples(PlanMetricsError):
    pass


class BadToken(PlanMetricsError):
    pass


class LengthMismatch(PlanMetricsError):
    pass


class TruncatedSequence(PlanMetricsError):
    pass


class UnknownLabel(PlanMetricsError):
    pass


class MissingMarker(PlanMetricsError):
    pass


class UnparsableToken(PlanMetricsError):
    pass


class GraphTooLarge(PlanMetricsError):
    pass


class ShapeMismatch(PlanMetricsError):
    pass


class NonPSDCovariance(PlanMetricsError):
    pass


class DegenerateInput(PlanMetricsError):
    pass


class EmptyDataset(PlanMetricsError):
    pass


class UnreadableFile(PlanMetricsError):
    pass
