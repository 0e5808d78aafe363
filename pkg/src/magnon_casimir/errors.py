"""Exception hierarchy shared by the library and the command line front-end."""


class MagnonCasimirError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(MagnonCasimirError, ValueError):
    """An input violates a documented invariant.

    ``field`` names the offending parameter or configuration key.
    """

    def __init__(self, field, message=None):
        self.field = field
        self.detail = message
        super().__init__(message or field)

    def __reduce__(self):
        return (type(self), (self.field, self.detail))


class ParseError(MagnonCasimirError):
    """A configuration document could not be decoded."""

    def __init__(self, message, line=None, key=None):
        self.detail = message
        self.line = line
        self.key = key
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key {key!r}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)

    def __reduce__(self):
        return (type(self), (self.detail, self.line, self.key))


class QuadratureFailure(MagnonCasimirError):
    """A refined quadrature disagreed with the base result beyond tolerance."""

    def __init__(self, message, n_z=None, rel_change=None):
        self.detail = message
        self.n_z = n_z
        self.rel_change = rel_change
        if n_z is not None:
            message = f"N_z={n_z}: {message}"
        super().__init__(message)

    def __reduce__(self):
        return (type(self), (self.detail, self.n_z, self.rel_change))


class NoEP(MagnonCasimirError):
    """The requested mode has no exceptional point at this damping."""


class NoBeat(MagnonCasimirError):
    """Fewer than two exceptional points exist, so there is no beat."""


class DegenerateBeat(NoBeat):
    """Both modes share the same period (K_h = 0), so the beat period is infinite."""


class InsufficientSpan(MagnonCasimirError):
    """A series is too short to resolve the requested period."""


class NotConverged(MagnonCasimirError):
    """A series has not settled onto an asymptote within the final window."""
