"""Exception hierarchy shared by all modules."""


class TGSError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(TGSError, ValueError):
    pass


class ShapeError(TGSError, ValueError):
    pass


class TrainingError(TGSError, RuntimeError):
    pass


class ExtractionError(TGSError, RuntimeError):
    pass


class AmbiguityError(ExtractionError):
    """Raised when a mean feature is equidistant from both class centers."""


class UsageError(TGSError, ValueError):
    pass
