"""Exception hierarchy.

Every validation failure raised by the toolbox derives from :class:`BciError`
so callers (and the CLI) can catch them in one place. Most also derive from
``ValueError`` because they signal bad argument values.
"""


class BciError(Exception):
    """Base class for all toolbox errors."""


# core data
class DimensionMismatch(BciError, ValueError):
    pass


class AxisNotFound(BciError, KeyError):
    pass


class AmbiguousAxis(BciError, ValueError):
    pass


# buffers
class ChannelMismatch(BciError, ValueError):
    pass


class SamplingRateMismatch(BciError, ValueError):
    pass


# sigproc
class NoChannelsLeft(BciError, ValueError):
    pass


class InvalidBand(BciError, ValueError):
    pass


class StateShapeMismatch(BciError, ValueError):
    pass


class SignalTooShort(BciError, ValueError):
    pass


class NonIntegerFactor(BciError, ValueError):
    pass


class EmptyInterval(BciError, ValueError):
    pass


class EmptyReference(BciError, ValueError):
    pass


class TooFewSamples(BciError, ValueError):
    pass


class WindowTooLarge(BciError, ValueError):
    pass


class UnstableFilter(BciError, ValueError):
    pass


# features
class NoEpochs(BciError, ValueError):
    pass


class EmptyIntervalWindow(BciError, ValueError):
    pass


class NotTwoClasses(BciError, ValueError):
    pass


class ZeroVarianceWarning(UserWarning):
    """Emitted by signed r-squared where the pooled variance is zero."""


class SingularCompositeCovariance(BciError, ValueError):
    pass


class ColumnOutOfRange(BciError, IndexError):
    pass


class LengthMismatch(BciError, ValueError):
    pass


class DegenerateTarget(BciError, ValueError):
    pass


class SingularMeanCovariance(BciError, ValueError):
    pass


class NonFiniteValues(BciError, ValueError):
    pass


# ml
class TooFewObservations(BciError, ValueError):
    pass


class SingularCovariance(BciError, ValueError):
    pass


class FeatureCountMismatch(BciError, ValueError):
    pass


# io
class UnserializableExtra(BciError, TypeError):
    pass


class IoFailure(BciError, OSError):
    pass


class CorruptContainer(BciError, ValueError):
    pass


class UnsupportedVersion(BciError, ValueError):
    pass


class RaggedRows(BciError, ValueError):
    pass


class BadMarkerLine(BciError, ValueError):
    pass


# viz
class MissingPosition(BciError, KeyError):
    pass


class TooFewElectrodes(BciError, ValueError):
    pass


class ValueOutOfRange(BciError, ValueError):
    pass


# online
class ConfigMismatch(BciError, ValueError):
    pass


class IncompleteSequence(BciError, ValueError):
    pass
