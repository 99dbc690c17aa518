"""Auditable multi-stakeholder randomization through commit-reveal ceremonies.

Each stakeholder commits to a hidden contribution, then reveals it; the
outcome is the modular sum, so it is uniform as long as at least one
contribution was drawn uniformly and independently.  Every step lands in
a hash-chained transcript that anyone can re-verify offline.
"""

from .ceremony import (
    CeremonyState,
    DrawSpec,
    Phase,
    abort_ceremony,
    create_ceremony,
    outcome_of,
    roster_statuses,
    selected_candidate,
    submit_commitment,
    submit_reveal,
)
from .commitment import (
    CommitmentDigest,
    Mask,
    Opening,
    commit,
    commit_encoding,
    new_mask,
    verify_opening,
)
from .draw import (
    ContributionValue,
    Modulus,
    contribution,
    mod_add,
    select_candidate,
    to_unit_fraction,
)
from .errors import (
    ConfigurationError,
    DeadlineExpired,
    DomainError,
    DuplicateCommitment,
    EncodingError,
    FairdrawError,
    InvalidOpening,
    OutOfRange,
    PhaseViolation,
    ProtocolError,
    UnknownStakeholder,
)
from .stats import (
    UniformitySummary,
    audit_outcomes,
    bin_outcomes,
    chi_square_survival,
    chi_square_uniformity,
)
from .transcript import (
    Aborted,
    CeremonyCreated,
    CommitmentSubmitted,
    Completed,
    OpeningRejected,
    RevealSubmitted,
    Transcript,
    TranscriptError,
    TranscriptRecord,
    VerificationReport,
    load_transcript,
    verify_transcript,
)

__version__ = "0.1.0"

__all__ = [
    "Aborted",
    "CeremonyCreated",
    "CeremonyState",
    "CommitmentDigest",
    "CommitmentSubmitted",
    "Completed",
    "ConfigurationError",
    "ContributionValue",
    "DeadlineExpired",
    "DomainError",
    "DrawSpec",
    "DuplicateCommitment",
    "EncodingError",
    "FairdrawError",
    "InvalidOpening",
    "Mask",
    "Modulus",
    "Opening",
    "OpeningRejected",
    "OutOfRange",
    "Phase",
    "PhaseViolation",
    "ProtocolError",
    "RevealSubmitted",
    "Transcript",
    "TranscriptError",
    "TranscriptRecord",
    "UniformitySummary",
    "UnknownStakeholder",
    "VerificationReport",
    "abort_ceremony",
    "audit_outcomes",
    "bin_outcomes",
    "chi_square_survival",
    "chi_square_uniformity",
    "commit",
    "commit_encoding",
    "contribution",
    "create_ceremony",
    "load_transcript",
    "mod_add",
    "new_mask",
    "outcome_of",
    "roster_statuses",
    "select_candidate",
    "selected_candidate",
    "submit_commitment",
    "submit_reveal",
    "to_unit_fraction",
    "verify_opening",
    "verify_transcript",
]
