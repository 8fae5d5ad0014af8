"""Exception hierarchy shared by all weavesense modules."""


class WeaveSenseError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(WeaveSenseError, ValueError):
    pass


class InvalidIndexError(WeaveSenseError, IndexError):
    pass


class ConfigError(WeaveSenseError, ValueError):
    """Raised when a WebConfig fails validation; ``errors`` lists every violation."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ScenarioError(WeaveSenseError, ValueError):
    pass


class InvalidWindowError(WeaveSenseError, ValueError):
    pass


class InvalidLengthError(WeaveSenseError, ValueError):
    pass


class DegenerateSignalError(WeaveSenseError, ValueError):
    """The signal carries no oscillatory content (e.g. DC only)."""


class NoPeaksError(WeaveSenseError, ValueError):
    pass


class TruncatedCaptureError(WeaveSenseError, ValueError):
    """The collection window runs past the end of the available samples."""


class AnovaError(WeaveSenseError, ValueError):
    pass


class TraceFormatError(WeaveSenseError, ValueError):
    pass


class ConfigFormatError(WeaveSenseError, ValueError):
    """A JSON config or scenario document is malformed; the message names the field."""
