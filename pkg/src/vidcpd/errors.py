"""Exception hierarchy shared across the toolkit."""


class CPDError(Exception):
    """Base class for all toolkit errors."""


class InvalidParameter(CPDError, ValueError):
    """A configuration value or argument is outside its allowed range."""


class InvalidInput(CPDError, ValueError):
    """Input data is malformed, empty, or has mismatched shapes."""


class SegmentTooShort(InvalidInput):
    """A series or interval is too short for the requested statistic."""


class DataError(CPDError):
    """A file could not be parsed.

    ``line`` is the 1-based line number of the offending record, when known.
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
