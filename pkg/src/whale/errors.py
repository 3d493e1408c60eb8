"""Exception hierarchy shared across the package."""


class WhaleError(Exception):
    """Base class for all errors raised by whale."""


class InvalidArgument(WhaleError, ValueError):
    pass


class EmptySelection(WhaleError, ValueError):
    """Raised when an intensity mask keeps no voxels."""


class DegenerateSpread(WhaleError, ValueError):
    """Raised when a cloud has zero spread along every axis."""


class EmptyWitnessSet(WhaleError, ValueError):
    """Raised when every point is a landmark, leaving nothing to witness."""


class InvalidFiltration(WhaleError, ValueError):
    pass


class SampleSizeError(WhaleError, ValueError):
    """Raised when a Rips reference is requested above the size guard."""


class FormatError(WhaleError, ValueError):
    """Raised when a file does not parse; carries the offending line number."""

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
