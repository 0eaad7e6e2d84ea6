"""Exception hierarchy shared by all modules."""


class MacrocertError(Exception):
    """Base class for every error raised by this package."""


class DomainError(MacrocertError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SizingError(MacrocertError, ValueError):
    """A state or window would exceed the configured size limits."""


class DegenerateBranchError(DomainError):
    """Two branches of a superposition coincide."""


class CutoffError(MacrocertError, RuntimeError):
    """The Fock-space cutoff is too small for the requested accuracy."""


class NotFoundError(MacrocertError, KeyError):
    """A requested sector or scenario does not exist."""


class ConfigError(MacrocertError, ValueError):
    """A scenario or sweep configuration failed validation.

    ``path`` names the offending parameter, e.g. ``"parameters.mean_photon"``.
    """

    def __init__(self, message, path=""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
