"""Exception types shared across the toolkit."""


class FavPropError(Exception):
    """Base class for all toolkit errors."""


class ConfigurationError(FavPropError, ValueError):
    """An ensemble, geometry or experiment definition is invalid.

    ``errors`` carries every problem found, as ``(field_path, message)``
    pairs, so callers can report them all at once.
    """

    def __init__(self, message, errors=None):
        super().__init__(message)
        self.errors = list(errors) if errors else []


class ArgumentError(FavPropError, ValueError):
    """A call received an out-of-range index or unusable argument."""


class HypothesisViolation(FavPropError, RuntimeError):
    """A sampled ensemble breaks the hypothesis an estimator relies on."""

    def __init__(self, message, ensemble=None):
        if ensemble is not None:
            message = f"{message} (ensemble: {ensemble})"
        super().__init__(message)
        self.ensemble = ensemble
