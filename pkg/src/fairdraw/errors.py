"""Exception hierarchy shared across the package.

Protocol errors carry a short machine-readable ``code`` so the HTTP
service and the CLI can surface them without string matching.
"""


class FairdrawError(Exception):
    """Base class for all errors raised by this package."""

    code = "error"


class DomainError(FairdrawError, ValueError):
    """An argument violates a mathematical precondition."""

    code = "domain_error"


class ConfigurationError(FairdrawError, ValueError):
    """A draw specification or candidate pool is malformed."""

    code = "configuration_error"


class EncodingError(FairdrawError, ValueError):
    """A value cannot be represented in a canonical byte encoding."""

    code = "encoding_error"


class ProtocolError(FairdrawError):
    """Base class for ceremony rule violations."""

    code = "protocol_error"


class PhaseViolation(ProtocolError):
    code = "phase_violation"


class UnknownStakeholder(ProtocolError):
    code = "unknown_stakeholder"


class DuplicateCommitment(ProtocolError):
    code = "duplicate_commitment"


class DeadlineExpired(ProtocolError):
    code = "deadline_expired"


class InvalidOpening(ProtocolError):
    code = "invalid_opening"


class OutOfRange(ProtocolError):
    code = "out_of_range"
