"""Exception types shared across the package."""


class GaitAssistError(Exception):
    """Base class for package-specific failures."""


class InvalidSpecError(GaitAssistError, ValueError):
    """A configuration, filter spec, or parameter set violates its contract."""


class DataFormatError(GaitAssistError, ValueError):
    """An on-disk trial log, manifest, or table is malformed or incomplete."""
