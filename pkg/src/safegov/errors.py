"""Exception hierarchy shared across the package."""


class SafegovError(Exception):
    """Base class for all errors raised by this package."""


class InvalidInputError(SafegovError, ValueError):
    """An argument violates a documented precondition."""


class EmptyInputError(InvalidInputError):
    """An aggregation was asked to summarize zero items."""


class BackendLoadError(SafegovError):
    """A classifier backend could not be constructed from its files."""


class InferenceError(SafegovError):
    """A loaded backend failed while producing logits."""


class SchemaError(SafegovError):
    """A data file does not match its documented layout."""


class EmptyCorpusError(SchemaError):
    """A corpus file parsed cleanly but retained zero usable rows."""
