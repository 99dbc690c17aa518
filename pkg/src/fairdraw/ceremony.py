"""Two-phase draw ceremony: Commit -> Reveal -> Complete (or Aborted).

The ordering rule carries the whole security argument: no reveal is
accepted while any commitment is outstanding, so nobody can pick a value
after seeing anyone else's.  States are immutable values; every
transition returns a new state, which makes replay from a transcript
trivially deterministic.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Mapping, Optional, Tuple

from .commitment import CommitmentDigest, Opening, verify_opening
from .draw import ContributionValue, Modulus, mod_add
from .errors import (
    ConfigurationError,
    DeadlineExpired,
    DuplicateCommitment,
    InvalidOpening,
    OutOfRange,
    PhaseViolation,
    UnknownStakeholder,
)

# Timestamps (and deadlines) are integer milliseconds since the Unix
# epoch, always supplied by the caller so replays are deterministic.
Timestamp = int


class Phase(str, Enum):
    SETUP = "setup"
    COMMIT = "commit"
    REVEAL = "reveal"
    COMPLETE = "complete"
    ABORTED = "aborted"


def _check_identifier(label: str, value: str) -> None:
    if not isinstance(value, str) or not value:
        raise ConfigurationError(f"{label} must be a non-empty string")
    if len(value.encode("utf-8")) > 255:
        raise ConfigurationError(f"{label} longer than 255 octets after UTF-8 encoding")


@dataclass(frozen=True)
class DrawSpec:
    """Parameters of one drawing.

    ``predecessor`` names an earlier aborted session this draw replaces;
    recording it in the transcript chain is what makes abort-and-retry
    visible to auditors instead of a quiet second try.
    """

    session_id: str
    modulus: Modulus
    roster: Tuple[str, ...]
    candidates: Optional[Tuple[str, ...]] = None
    metadata: str = ""
    commit_deadline: Optional[Timestamp] = None
    reveal_deadline: Optional[Timestamp] = None
    predecessor: Optional[str] = None

    def __post_init__(self) -> None:
        _check_identifier("session_id", self.session_id)
        if not isinstance(self.roster, tuple):
            object.__setattr__(self, "roster", tuple(self.roster))
        if len(self.roster) < 1:
            raise ConfigurationError("roster must name at least one stakeholder")
        for sid in self.roster:
            _check_identifier("stakeholder_id", sid)
        if len(set(self.roster)) != len(self.roster):
            raise ConfigurationError("roster ids must be unique")
        if self.candidates is not None:
            if not isinstance(self.candidates, tuple):
                object.__setattr__(self, "candidates", tuple(self.candidates))
            if len(self.candidates) != self.modulus.m:
                raise ConfigurationError(
                    f"candidate pool size {len(self.candidates)} != modulus {self.modulus.m}"
                )
        if not isinstance(self.metadata, str):
            raise ConfigurationError("metadata must be a string")
        for label, deadline in (
            ("commit_deadline", self.commit_deadline),
            ("reveal_deadline", self.reveal_deadline),
        ):
            if deadline is not None and (
                not isinstance(deadline, int) or isinstance(deadline, bool)
            ):
                raise ConfigurationError(f"{label} must be an integer timestamp")
        if self.predecessor is not None:
            _check_identifier("predecessor", self.predecessor)

    @property
    def k(self) -> int:
        return len(self.roster)


@dataclass(frozen=True)
class CeremonyState:
    """Phase-tagged aggregate of one ceremony's progress.

    Treat as immutable: the maps are never mutated in place, transitions
    build fresh ones.
    """

    spec: DrawSpec
    phase: Phase
    commitments: Mapping[str, CommitmentDigest]
    reveals: Mapping[str, Opening]
    outcome: Optional[ContributionValue] = None
    abort_reason: Optional[str] = None
    successor_hint: Optional[str] = None


def create_ceremony(spec: DrawSpec) -> CeremonyState:
    """Open the commitment phase for a validated spec."""
    if not isinstance(spec, DrawSpec):
        raise ConfigurationError("spec must be a DrawSpec")
    return CeremonyState(spec=spec, phase=Phase.COMMIT, commitments={}, reveals={})


def submit_commitment(
    state: CeremonyState,
    stakeholder_id: str,
    digest: CommitmentDigest,
    now: Timestamp,
) -> CeremonyState:
    """Record a stakeholder's digest; advance to Reveal once all are in.

    A first commitment is immutable: re-committing is refused even with
    an identical digest, so the commit slot can never be used as a
    second choice channel.
    """
    if state.phase is not Phase.COMMIT:
        raise PhaseViolation(f"cannot commit in phase {state.phase.value}")
    if stakeholder_id not in state.spec.roster:
        raise UnknownStakeholder(f"{stakeholder_id!r} is not on the roster")
    if stakeholder_id in state.commitments:
        raise DuplicateCommitment(f"{stakeholder_id!r} has already committed")
    deadline = state.spec.commit_deadline
    if deadline is not None and now > deadline:
        raise DeadlineExpired("commit deadline has passed")

    commitments = dict(state.commitments)
    commitments[stakeholder_id] = digest
    phase = Phase.REVEAL if len(commitments) == state.spec.k else Phase.COMMIT
    return replace(state, phase=phase, commitments=commitments)


def submit_reveal(
    state: CeremonyState,
    stakeholder_id: str,
    opening: Opening,
    now: Timestamp,
) -> CeremonyState:
    """Record a verified opening; compute the outcome once all are in.

    Rejected openings leave the state untouched: the reveal slot is only
    consumed by an opening that matches the recorded digest, so a
    transmission error can be retried before the deadline.
    """
    if state.phase is not Phase.REVEAL:
        # In particular no reveal is accepted while any commitment is
        # outstanding; a late committer learns nothing to adapt to.
        raise PhaseViolation(f"cannot reveal in phase {state.phase.value}")
    if stakeholder_id not in state.spec.roster:
        raise UnknownStakeholder(f"{stakeholder_id!r} is not on the roster")
    if opening.value.modulus != state.spec.modulus:
        raise OutOfRange(
            f"opening value carries modulus {opening.value.modulus.m}, "
            f"session uses {state.spec.modulus.m}"
        )
    deadline = state.spec.reveal_deadline
    if deadline is not None and now > deadline:
        raise DeadlineExpired("reveal deadline has passed")
    recorded = state.reveals.get(stakeholder_id)
    if recorded is not None:
        if recorded == opening:
            return state  # idempotent re-reveal of the same opening
        raise InvalidOpening(f"{stakeholder_id!r} already revealed a different opening")
    digest = state.commitments[stakeholder_id]
    if not verify_opening(digest, state.spec.session_id, stakeholder_id, opening):
        raise InvalidOpening(
            f"opening by {stakeholder_id!r} does not match the committed digest"
        )

    reveals = dict(state.reveals)
    reveals[stakeholder_id] = opening
    if len(reveals) == state.spec.k:
        outcome = mod_add(
            [reveals[sid].value for sid in state.spec.roster], state.spec.modulus
        )
        return replace(state, phase=Phase.COMPLETE, reveals=reveals, outcome=outcome)
    return replace(state, reveals=reveals)


def abort_ceremony(
    state: CeremonyState,
    reason: str,
    now: Optional[Timestamp] = None,
    successor_hint: Optional[str] = None,
) -> CeremonyState:
    """Terminate a live ceremony permanently.

    Aborts are first-class recorded events, never an erasure: a
    replacement draw must run as a new session whose spec cites this
    session as its predecessor.  Completed ceremonies are irrevocable.
    """
    if state.phase not in (Phase.COMMIT, Phase.REVEAL):
        raise PhaseViolation(f"cannot abort in phase {state.phase.value}")
    if not isinstance(reason, str) or not reason:
        raise ConfigurationError("abort reason must be a non-empty string")
    return replace(
        state, phase=Phase.ABORTED, abort_reason=reason, successor_hint=successor_hint
    )


def outcome_of(state: CeremonyState) -> Optional[ContributionValue]:
    """The final value, present only once the ceremony completed."""
    if state.phase is Phase.COMPLETE:
        return state.outcome
    return None


def roster_statuses(state: CeremonyState) -> Mapping[str, str]:
    """Per-stakeholder progress: waiting, committed, or revealed."""
    out = {}
    for sid in state.spec.roster:
        if sid in state.reveals:
            out[sid] = "revealed"
        elif sid in state.commitments:
            out[sid] = "committed"
        else:
            out[sid] = "waiting"
    return out


def selected_candidate(state: CeremonyState) -> Optional[str]:
    """The winning label, when candidates were configured and the draw completed."""
    if state.phase is not Phase.COMPLETE or state.spec.candidates is None:
        return None
    assert state.outcome is not None
    return state.spec.candidates[state.outcome.n]
