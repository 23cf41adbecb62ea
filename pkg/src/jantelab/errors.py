"""Exception hierarchy shared across the package."""


class JanteError(Exception):
    """Base class for all jantelab errors."""


class DimensionMismatch(JanteError):
    """A point's dimension does not match the body or configuration."""


class DegenerateConfiguration(JanteError):
    """Configuration has coincident (or numerically coincident) points."""


class AttemptsExhausted(JanteError):
    """Rejection sampling gave up; the geometry is numerically degenerate."""


class PointNotInKeep(JanteError):
    """A replayed arrival point lies outside the keep set."""


class UnboundedBody(JanteError):
    """Operation needs a bounded body (uniform sampling on the whole body)."""


class ConfigError(JanteError):
    """Invalid run configuration (bad file, unknown keys, bad values)."""
