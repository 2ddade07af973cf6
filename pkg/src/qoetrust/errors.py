"""Exception types shared across the package."""


class QoETrustError(Exception):
    """Base class for all package errors."""


class ValidationError(QoETrustError):
    """A value or record violates a declared invariant."""


class ConfigError(QoETrustError):
    """A scenario config is malformed, has unknown keys, or dangling references.

    The message always names the offending path (e.g. "peers.honest").
    """
