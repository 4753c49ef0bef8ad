"""Exception hierarchy shared by all triplehelix modules."""


class HelixError(Exception):
    """Base class for every error raised by this package."""


class ParseError(HelixError, ValueError):
    """Malformed record or CSV input. Carries the offending line number."""

    def __init__(self, message, line=None, source=None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}".strip() if where else message)


class InvalidDistributionError(HelixError, ValueError):
    pass


class DivergenceError(HelixError, ValueError):
    """Observed mass falls on a cell the prediction assigns zero probability."""


class InconsistentCountsError(HelixError, ValueError):
    """Inclusive hit counts that imply a negative exclusive Venn cell."""

    def __init__(self, cell, value, year=None):
        self.cell = cell
        self.value = value
        self.year = year
        prefix = f"year {year}: " if year is not None else ""
        super().__init__(f"{prefix}inconsistent counts, cell {cell} would be {value}")


class UnknownSliceError(HelixError, KeyError):
    def __init__(self, name, known):
        self.name = name
        self.known = sorted(known)
        super().__init__(f"unknown slice {name!r}; known slices: {', '.join(self.known)}")

    def __str__(self):
        return self.args[0]


class InsufficientHistoryError(HelixError, ValueError):
    pass
