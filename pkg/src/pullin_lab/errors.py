"""Exception types shared across the toolkit."""


class PullinLabError(Exception):
    """Base class for all toolkit-specific errors."""


class GapClosedError(PullinLabError, ValueError):
    """Deflection reached or crossed the electrode gap (physical contact)."""


class NoPullInError(PullinLabError, RuntimeError):
    """Voltage search exhausted its ceiling without losing convergence."""


class PastPullInError(PullinLabError, ValueError):
    """Requested state lies beyond the pull-in instability (no stable branch)."""


class NotConvergedError(PullinLabError, RuntimeError):
    """An operation required a converged solution but got a diverged one."""


class SchemaVersionError(PullinLabError, ValueError):
    """Persisted file carries an unsupported schema version."""
