"""Exception types shared across the package."""


class PermgasError(Exception):
    """Base class for package-specific failures."""


class ConfigError(PermgasError, ValueError):
    """Malformed or inconsistent configuration input."""


class SizeCapError(PermgasError, ValueError):
    """Requested exact enumeration exceeds the instance-size cap."""


class CertificateError(PermgasError, RuntimeError):
    """A numeric truncation certificate could not be met."""

    def __init__(self, msg, achieved=None, required=None):
        super().__init__(msg)
        self.achieved = achieved
        self.required = required


class QuadratureError(PermgasError, RuntimeError):
    """Adaptive quadrature or series summation failed to reach its target."""


class UnboundedSearchError(PermgasError, RuntimeError):
    """A bracketing search for a maximizer failed; diagnostics attached."""

    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}
