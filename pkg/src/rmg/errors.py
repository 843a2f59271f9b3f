"""Exception types raised across the pipeline.

Everything derives from :class:`RMGError` so callers (and the CLI) can
catch pipeline failures without swallowing genuine bugs.
"""


class RMGError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(RMGError, ValueError):
    """A radar configuration violates one of its invariants."""

    def __init__(self, invariant, message):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant


class AliasError(RMGError, ValueError):
    """Beat frequency at or beyond the Nyquist limit of the fast-time ADC."""


class TrajectoryError(RMGError, ValueError):
    pass


class EmptyWindowError(RMGError, ValueError):
    pass


class ZeroSampleError(RMGError, ValueError):
    """Phase is undefined for an exactly zero complex sample."""


class CaptureFormatError(RMGError, ValueError):
    """Malformed capture file; ``offset`` is the byte offset of the problem."""

    def __init__(self, message, offset=0):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class SampleRangeError(RMGError, ValueError):
    """A sample does not fit the int16 capture layout."""


class SchemaError(RMGError, ValueError):
    """JSON document rejected; ``pointer`` is a JSON pointer to the offending node."""

    def __init__(self, message, pointer=""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class CSVFormatError(RMGError, ValueError):
    def __init__(self, message, line=0):
        super().__init__(f"line {line}: {message}")
        self.line = line


class CoverageError(RMGError, ValueError):
    """Reference trace does not span the radar capture."""


class NormalizationError(RMGError, ValueError):
    pass


class DegenerateDataError(RMGError, ValueError):
    pass


class MissingStageError(RMGError, LookupError):
    pass


class MissingCycleError(RMGError, LookupError):
    pass
