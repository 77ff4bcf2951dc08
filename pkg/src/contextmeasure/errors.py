"""Exception types raised by the toolkit."""


class ContextMeasureError(Exception):
    """Base class for every error raised by this package."""


class DimensionMismatch(ContextMeasureError, ValueError):
    pass


class InvalidMap(ContextMeasureError, ValueError):
    pass


class EmptyForeground(ContextMeasureError, ValueError):
    pass


class EmptyGroundTruth(EmptyForeground):
    pass


class BothEmpty(ContextMeasureError, ValueError):
    pass


class DegenerateCovariance(ContextMeasureError, ValueError):
    pass


class KernelTooLarge(ContextMeasureError, ValueError):
    pass


class EmptyContext(ContextMeasureError, ValueError):
    pass


class NoValidPatches(ContextMeasureError, ValueError):
    pass


class EmptyCorpus(ContextMeasureError, ValueError):
    pass


class LengthMismatch(ContextMeasureError, ValueError):
    pass


class DegenerateRanks(ContextMeasureError, ValueError):
    pass


class MissingImage(ContextMeasureError, ValueError):
    pass


class TooFewQualifiedSamples(ContextMeasureError, ValueError):
    pass


class EmptyCandidateRegion(ContextMeasureError, ValueError):
    pass


class DecodeError(ContextMeasureError, OSError):
    pass


class ManifestError(ContextMeasureError, ValueError):
    pass
