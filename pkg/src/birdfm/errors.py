"""Exception types raised across the pipeline."""


class BirdFMError(Exception):
    """Base class for all errors raised by birdfm."""


# ingest
class UnreadableFile(BirdFMError):
    pass


class UnsupportedEncoding(BirdFMError):
    pass


class EmptyClip(BirdFMError):
    pass


class MissingColumn(BirdFMError):
    pass


class DuplicatePath(BirdFMError):
    pass


# spectral / extractors
class ClipTooShort(BirdFMError):
    pass


class NoInBandEnergy(BirdFMError):
    pass


class NoVoicedFrames(BirdFMError):
    pass


class IllConditioned(BirdFMError):
    pass


# features / selection / evaluation
class EmptyInput(BirdFMError):
    pass


class EmptyDistribution(BirdFMError):
    pass


class SchemaMismatch(BirdFMError):
    pass


class SingleClass(BirdFMError):
    pass


# robustness
class CodecUnavailable(BirdFMError):
    pass


class CodecFailed(BirdFMError):
    pass


class InsufficientPairs(BirdFMError):
    pass


class ZeroVariance(BirdFMError):
    pass
