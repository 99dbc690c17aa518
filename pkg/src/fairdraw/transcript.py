"""Append-only, hash-chained ceremony transcripts.

Every state change of a ceremony is recorded as one transcript record.
Records are serialized as one JSON object per line for human inspection,
but each record's hash is computed over a fixed binary framing of its
fields, because JSON bytes are not canonical.  The framing is::

    "FAIRDRAW-RECORD-V1"   ASCII domain tag, 18 octets
    seq                    8 octets, big-endian unsigned
    prev_hash              32 octets (all zero for the first record)
    event                  tagged encoding, see below

    record_hash = SHA-256 of the above

Event encodings, first octet is the tag.  Variable-length strings are
UTF-8 with a 4-octet big-endian length prefix ("str"); optional fields
are a presence octet (0 or 1) followed by the value when present
("opt"); integers are 8-octet big-endian unsigned ("u64").

    0x01 ceremony_created     str session_id, u64 modulus,
                              u32 roster count then str per id,
                              opt candidates (u64 count then str per label),
                              str metadata, opt u64 commit_deadline,
                              opt u64 reveal_deadline, opt str predecessor
    0x02 commitment_submitted str stakeholder_id, 32-octet digest,
                              u64 timestamp
    0x03 reveal_submitted     str stakeholder_id, u64 value,
                              32-octet mask, u64 timestamp
    0x04 opening_rejected     str stakeholder_id, str reason, u64 timestamp
    0x05 completed            u64 outcome
    0x06 aborted              str reason, opt str successor_hint

Verification replays the whole ceremony from the records: it recomputes
every hash and chain link, re-runs the phase rules, re-checks every
opening against its committed digest, and recomputes the outcome.  Any
tampered byte therefore surfaces as a finding, and the verdict is a pure
function of the transcript bytes.
"""

import hashlib
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Tuple, Union

from .ceremony import (
    CeremonyState,
    DrawSpec,
    Phase,
    abort_ceremony,
    create_ceremony,
    submit_commitment,
    submit_reveal,
)
from .commitment import CommitmentDigest, Mask, Opening
from .draw import ContributionValue, Modulus
from .errors import (
    EncodingError,
    FairdrawError,
    InvalidOpening,
    PhaseViolation,
    UnknownStakeholder,
)

RECORD_DOMAIN_TAG = b"FAIRDRAW-RECORD-V1"
ZERO_HASH = bytes(32)

_HEX64 = re.compile(r"\A[0-9a-f]{64}\Z")
_U64_MAX = 2**64 - 1


class TranscriptError(FairdrawError):
    """A transcript failed verification or could not be decoded."""

    code = "invalid_transcript"


class _OutcomeMismatch(FairdrawError):
    """Internal marker: a completed record disagrees with the replayed outcome."""

    code = "outcome_mismatch"


# ---------------------------------------------------------------------------
# Events


@dataclass(frozen=True)
class CeremonyCreated:
    session_id: str
    modulus: int
    roster: Tuple[str, ...]
    candidates: Optional[Tuple[str, ...]] = None
    metadata: str = ""
    commit_deadline: Optional[int] = None
    reveal_deadline: Optional[int] = None
    predecessor: Optional[str] = None

    @classmethod
    def from_spec(cls, spec: DrawSpec) -> "CeremonyCreated":
        return cls(
            session_id=spec.session_id,
            modulus=spec.modulus.m,
            roster=spec.roster,
            candidates=spec.candidates,
            metadata=spec.metadata,
            commit_deadline=spec.commit_deadline,
            reveal_deadline=spec.reveal_deadline,
            predecessor=spec.predecessor,
        )

    def to_spec(self) -> DrawSpec:
        return DrawSpec(
            session_id=self.session_id,
            modulus=Modulus(self.modulus),
            roster=tuple(self.roster),
            candidates=tuple(self.candidates) if self.candidates is not None else None,
            metadata=self.metadata,
            commit_deadline=self.commit_deadline,
            reveal_deadline=self.reveal_deadline,
            predecessor=self.predecessor,
        )


@dataclass(frozen=True)
class CommitmentSubmitted:
    stakeholder_id: str
    digest: bytes
    timestamp: int


@dataclass(frozen=True)
class RevealSubmitted:
    stakeholder_id: str
    value: int
    mask: bytes
    timestamp: int


@dataclass(frozen=True)
class OpeningRejected:
    stakeholder_id: str
    reason: str
    timestamp: int


@dataclass(frozen=True)
class Completed:
    outcome: int


@dataclass(frozen=True)
class Aborted:
    reason: str
    successor_hint: Optional[str] = None


Event = Union[
    CeremonyCreated,
    CommitmentSubmitted,
    RevealSubmitted,
    OpeningRejected,
    Completed,
    Aborted,
]


@dataclass(frozen=True)
class TranscriptRecord:
    seq: int
    prev_hash: bytes
    event: Event
    record_hash: bytes


# ---------------------------------------------------------------------------
# Binary framing


def _u32(x: int) -> bytes:
    if not 0 <= x < 2**32:
        raise EncodingError(f"value {x} does not fit in 4 octets")
    return x.to_bytes(4, "big")


def _u64(x: int) -> bytes:
    if not isinstance(x, int) or isinstance(x, bool) or not 0 <= x <= _U64_MAX:
        raise EncodingError(f"value {x!r} does not fit in 8 octets")
    return x.to_bytes(8, "big")


def _fixed(b: bytes, n: int) -> bytes:
    if not isinstance(b, bytes) or len(b) != n:
        raise EncodingError(f"expected exactly {n} octets")
    return b


def _str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return _u32(len(raw)) + raw


def _opt(value, enc) -> bytes:
    if value is None:
        return b"\x00"
    return b"\x01" + enc(value)


def encode_event(event: Event) -> bytes:
    if isinstance(event, CeremonyCreated):
        roster = _u32(len(event.roster)) + b"".join(_str(s) for s in event.roster)
        cands = _opt(
            event.candidates,
            lambda cs: _u64(len(cs)) + b"".join(_str(c) for c in cs),
        )
        return (
            b"\x01"
            + _str(event.session_id)
            + _u64(event.modulus)
            + roster
            + cands
            + _str(event.metadata)
            + _opt(event.commit_deadline, _u64)
            + _opt(event.reveal_deadline, _u64)
            + _opt(event.predecessor, _str)
        )
    if isinstance(event, CommitmentSubmitted):
        return (
            b"\x02"
            + _str(event.stakeholder_id)
            + _fixed(event.digest, 32)
            + _u64(event.timestamp)
        )
    if isinstance(event, RevealSubmitted):
        return (
            b"\x03"
            + _str(event.stakeholder_id)
            + _u64(event.value)
            + _fixed(event.mask, 32)
            + _u64(event.timestamp)
        )
    if isinstance(event, OpeningRejected):
        return (
            b"\x04"
            + _str(event.stakeholder_id)
            + _str(event.reason)
            + _u64(event.timestamp)
        )
    if isinstance(event, Completed):
        return b"\x05" + _u64(event.outcome)
    if isinstance(event, Aborted):
        return b"\x06" + _str(event.reason) + _opt(event.successor_hint, _str)
    raise EncodingError(f"unknown event type {type(event).__name__}")


def record_frame(seq: int, prev_hash: bytes, event: Event) -> bytes:
    return RECORD_DOMAIN_TAG + _u64(seq) + _fixed(prev_hash, 32) + encode_event(event)


def make_record(seq: int, prev_hash: bytes, event: Event) -> TranscriptRecord:
    digest = hashlib.sha256(record_frame(seq, prev_hash, event)).digest()
    return TranscriptRecord(seq=seq, prev_hash=prev_hash, event=event, record_hash=digest)


# ---------------------------------------------------------------------------
# JSON rendering (transport only; hashes never cover the JSON bytes)

_EVENT_TYPES = {
    CeremonyCreated: "ceremony_created",
    CommitmentSubmitted: "commitment_submitted",
    RevealSubmitted: "reveal_submitted",
    OpeningRejected: "opening_rejected",
    Completed: "completed",
    Aborted: "aborted",
}


def event_to_json(event: Event) -> dict:
    if isinstance(event, CeremonyCreated):
        spec: dict = {
            "session_id": event.session_id,
            "modulus": event.modulus,
            "roster": list(event.roster),
            "metadata": event.metadata,
        }
        if event.candidates is not None:
            spec["candidates"] = list(event.candidates)
        if event.commit_deadline is not None:
            spec["commit_deadline"] = event.commit_deadline
        if event.reveal_deadline is not None:
            spec["reveal_deadline"] = event.reveal_deadline
        if event.predecessor is not None:
            spec["predecessor"] = event.predecessor
        return {"type": "ceremony_created", "spec": spec}
    if isinstance(event, CommitmentSubmitted):
        return {
            "type": "commitment_submitted",
            "stakeholder_id": event.stakeholder_id,
            "digest": event.digest.hex(),
            "timestamp": event.timestamp,
        }
    if isinstance(event, RevealSubmitted):
        return {
            "type": "reveal_submitted",
            "stakeholder_id": event.stakeholder_id,
            "value": event.value,
            "mask": event.mask.hex(),
            "timestamp": event.timestamp,
        }
    if isinstance(event, OpeningRejected):
        return {
            "type": "opening_rejected",
            "stakeholder_id": event.stakeholder_id,
            "reason": event.reason,
            "timestamp": event.timestamp,
        }
    if isinstance(event, Completed):
        return {"type": "completed", "outcome": event.outcome}
    if isinstance(event, Aborted):
        out: dict = {"type": "aborted", "reason": event.reason}
        if event.successor_hint is not None:
            out["successor_hint"] = event.successor_hint
        return out
    raise EncodingError(f"unknown event type {type(event).__name__}")


def record_to_json(record: TranscriptRecord) -> dict:
    return {
        "seq": record.seq,
        "prev_hash": record.prev_hash.hex(),
        "event": event_to_json(record.event),
        "record_hash": record.record_hash.hex(),
    }


def record_to_line(record: TranscriptRecord) -> str:
    return json.dumps(record_to_json(record), separators=(",", ":"))


# ---------------------------------------------------------------------------
# Strict parsing.  Hostile input is expected: every structural defect is
# returned as a finding, never raised past the parser.


def _want_u64(obj: dict, key: str, optional: bool = False) -> Optional[int]:
    if key not in obj:
        if optional:
            return None
        raise EncodingError(f"missing field {key!r}")
    v = obj[key]
    if not isinstance(v, int) or isinstance(v, bool) or not 0 <= v <= _U64_MAX:
        raise EncodingError(f"field {key!r} must be an unsigned 64-bit integer")
    return v


def _want_str(obj: dict, key: str, optional: bool = False) -> Optional[str]:
    if key not in obj:
        if optional:
            return None
        raise EncodingError(f"missing field {key!r}")
    v = obj[key]
    if not isinstance(v, str):
        raise EncodingError(f"field {key!r} must be a string")
    return v


def _want_hex32(obj: dict, key: str) -> bytes:
    v = _want_str(obj, key)
    assert v is not None
    if not _HEX64.match(v):
        raise EncodingError(f"field {key!r} must be 64 lowercase hex digits")
    return bytes.fromhex(v)


def _want_str_list(obj: dict, key: str, optional: bool = False) -> Optional[Tuple[str, ...]]:
    if key not in obj:
        if optional:
            return None
        raise EncodingError(f"missing field {key!r}")
    v = obj[key]
    if not isinstance(v, list) or not all(isinstance(x, str) for x in v):
        raise EncodingError(f"field {key!r} must be a list of strings")
    return tuple(v)


def _check_keys(obj: dict, required: set, optional: set = frozenset()) -> None:
    keys = set(obj)
    missing = required - keys
    if missing:
        raise EncodingError(f"missing fields {sorted(missing)}")
    extra = keys - required - optional
    if extra:
        raise EncodingError(f"unexpected fields {sorted(extra)}")


def event_from_json(obj) -> Event:
    if not isinstance(obj, dict):
        raise EncodingError("event must be an object")
    etype = _want_str(obj, "type")
    if etype == "ceremony_created":
        _check_keys(obj, {"type", "spec"})
        spec = obj["spec"]
        if not isinstance(spec, dict):
            raise EncodingError("spec must be an object")
        _check_keys(
            spec,
            {"session_id", "modulus", "roster", "metadata"},
            {"candidates", "commit_deadline", "reveal_deadline", "predecessor"},
        )
        return CeremonyCreated(
            session_id=_want_str(spec, "session_id"),
            modulus=_want_u64(spec, "modulus"),
            roster=_want_str_list(spec, "roster"),
            candidates=_want_str_list(spec, "candidates", optional=True),
            metadata=_want_str(spec, "metadata"),
            commit_deadline=_want_u64(spec, "commit_deadline", optional=True),
            reveal_deadline=_want_u64(spec, "reveal_deadline", optional=True),
            predecessor=_want_str(spec, "predecessor", optional=True),
        )
    if etype == "commitment_submitted":
        _check_keys(obj, {"type", "stakeholder_id", "digest", "timestamp"})
        return CommitmentSubmitted(
            stakeholder_id=_want_str(obj, "stakeholder_id"),
            digest=_want_hex32(obj, "digest"),
            timestamp=_want_u64(obj, "timestamp"),
        )
    if etype == "reveal_submitted":
        _check_keys(obj, {"type", "stakeholder_id", "value", "mask", "timestamp"})
        return RevealSubmitted(
            stakeholder_id=_want_str(obj, "stakeholder_id"),
            value=_want_u64(obj, "value"),
            mask=_want_hex32(obj, "mask"),
            timestamp=_want_u64(obj, "timestamp"),
        )
    if etype == "opening_rejected":
        _check_keys(obj, {"type", "stakeholder_id", "reason", "timestamp"})
        return OpeningRejected(
            stakeholder_id=_want_str(obj, "stakeholder_id"),
            reason=_want_str(obj, "reason"),
            timestamp=_want_u64(obj, "timestamp"),
        )
    if etype == "completed":
        _check_keys(obj, {"type", "outcome"})
        return Completed(outcome=_want_u64(obj, "outcome"))
    if etype == "aborted":
        _check_keys(obj, {"type", "reason"}, {"successor_hint"})
        return Aborted(
            reason=_want_str(obj, "reason"),
            successor_hint=_want_str(obj, "successor_hint", optional=True),
        )
    raise EncodingError(f"unknown event type {etype!r}")


def record_from_json(obj) -> TranscriptRecord:
    if not isinstance(obj, dict):
        raise EncodingError("record must be an object")
    _check_keys(obj, {"seq", "prev_hash", "event", "record_hash"})
    return TranscriptRecord(
        seq=_want_u64(obj, "seq"),
        prev_hash=_want_hex32(obj, "prev_hash"),
        event=event_from_json(obj["event"]),
        record_hash=_want_hex32(obj, "record_hash"),
    )


# ---------------------------------------------------------------------------
# Replay: fold events through the ceremony state machine.


def _apply_event(
    state: Optional[CeremonyState], completed_recorded: bool, event: Event
) -> Tuple[CeremonyState, bool]:
    """One replay step; raises when the event is illegal at this point."""
    if completed_recorded:
        raise PhaseViolation("transcript continues after its completed record")
    if isinstance(event, CeremonyCreated):
        if state is not None:
            raise PhaseViolation("duplicate ceremony_created record")
        return create_ceremony(event.to_spec()), False
    if state is None:
        raise PhaseViolation("first record must be ceremony_created")
    if isinstance(event, CommitmentSubmitted):
        digest = CommitmentDigest(event.digest)
        return (
            submit_commitment(state, event.stakeholder_id, digest, event.timestamp),
            False,
        )
    if isinstance(event, RevealSubmitted):
        if event.stakeholder_id in state.reveals:
            raise PhaseViolation(
                f"duplicate reveal record for {event.stakeholder_id!r}"
            )
        opening = Opening(
            ContributionValue(event.value, state.spec.modulus), Mask(event.mask)
        )
        return (
            submit_reveal(state, event.stakeholder_id, opening, event.timestamp),
            False,
        )
    if isinstance(event, OpeningRejected):
        if state.phase is not Phase.REVEAL:
            raise PhaseViolation(
                f"opening_rejected outside reveal phase ({state.phase.value})"
            )
        if event.stakeholder_id not in state.spec.roster:
            raise UnknownStakeholder(
                f"opening_rejected for unknown {event.stakeholder_id!r}"
            )
        return state, False
    if isinstance(event, Completed):
        if state.phase is not Phase.COMPLETE or state.outcome is None:
            raise PhaseViolation("completed record before all reveals")
        if event.outcome != state.outcome.n:
            raise _OutcomeMismatch(
                f"recorded outcome {event.outcome} != recomputed {state.outcome.n}"
            )
        return state, True
    if isinstance(event, Aborted):
        return (
            abort_ceremony(state, event.reason, successor_hint=event.successor_hint),
            False,
        )
    raise EncodingError(f"unknown event type {type(event).__name__}")


# ---------------------------------------------------------------------------
# The transcript value


@dataclass(frozen=True)
class Transcript:
    """Immutable chain of records plus the replayed ceremony state."""

    records: Tuple[TranscriptRecord, ...] = ()
    state: Optional[CeremonyState] = None
    completed_recorded: bool = False

    def append(self, event: Event) -> "Transcript":
        """Validate the event against the replayed state, then chain it."""
        new_state, new_completed = _apply_event(
            self.state, self.completed_recorded, event
        )
        prev = self.records[-1].record_hash if self.records else ZERO_HASH
        record = make_record(len(self.records), prev, event)
        return Transcript(
            records=self.records + (record,),
            state=new_state,
            completed_recorded=new_completed,
        )

    def to_bytes(self) -> bytes:
        return b"".join(
            record_to_line(r).encode("utf-8") + b"\n" for r in self.records
        )

    @property
    def last_seq(self) -> int:
        return len(self.records) - 1


def transcript_from_events(events: Iterable[Event]) -> Transcript:
    t = Transcript()
    for event in events:
        t = t.append(event)
    return t


# ---------------------------------------------------------------------------
# Verification


@dataclass(frozen=True)
class VerificationReport:
    chain_ok: bool
    phase_order_ok: bool
    openings_ok: bool
    outcome_ok: bool
    recomputed_outcome: Optional[int] = None
    findings: Tuple[Tuple[int, str], ...] = ()

    @property
    def all_ok(self) -> bool:
        return (
            self.chain_ok and self.phase_order_ok and self.openings_ok and self.outcome_ok
        )

    def to_json(self) -> dict:
        return {
            "chain_ok": self.chain_ok,
            "phase_order_ok": self.phase_order_ok,
            "openings_ok": self.openings_ok,
            "outcome_ok": self.outcome_ok,
            "recomputed_outcome": self.recomputed_outcome,
            "findings": [{"seq": s, "description": d} for s, d in self.findings],
        }


@dataclass
class _Findings:
    chain: List[Tuple[int, str]] = field(default_factory=list)
    phase: List[Tuple[int, str]] = field(default_factory=list)
    openings: List[Tuple[int, str]] = field(default_factory=list)
    outcome: List[Tuple[int, str]] = field(default_factory=list)

    def merged(self) -> Tuple[Tuple[int, str], ...]:
        return tuple(sorted(self.chain + self.phase + self.openings + self.outcome))


def _parse_lines(data: bytes) -> List[bytes]:
    lines = data.split(b"\n")
    if lines and lines[-1] == b"":
        lines.pop()
    return lines


def verify_transcript(data: Union[bytes, str]) -> VerificationReport:
    """Re-verify a transcript from its serialized bytes.

    Pure function of the input: recomputes every record hash and chain
    link, replays the phase rules, re-checks every opening against its
    digest, and recomputes the outcome.  Malformed input yields findings,
    never an exception.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    findings = _Findings()
    parsed: List[Optional[TranscriptRecord]] = []

    for i, raw in enumerate(_parse_lines(data)):
        try:
            text = raw.decode("utf-8")
            obj = json.loads(text)
            record = record_from_json(obj)
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            findings.chain.append((i, f"malformed record: {exc}"))
            parsed.append(None)
            continue
        except EncodingError as exc:
            findings.chain.append((i, f"malformed record: {exc}"))
            parsed.append(None)
            continue
        parsed.append(record)

        if record.seq != i:
            findings.chain.append((i, f"sequence number {record.seq}, expected {i}"))
        if i == 0:
            if record.prev_hash != ZERO_HASH:
                findings.chain.append((i, "first record must have all-zero prev_hash"))
        else:
            prev = parsed[i - 1]
            if prev is not None and record.prev_hash != prev.record_hash:
                findings.chain.append((i, "prev_hash does not match preceding record"))
        try:
            expected = make_record(record.seq, record.prev_hash, record.event)
        except EncodingError as exc:
            findings.chain.append((i, f"unencodable record: {exc}"))
            continue
        if expected.record_hash != record.record_hash:
            findings.chain.append((i, "record_hash does not match record contents"))

    state: Optional[CeremonyState] = None
    completed_recorded = False
    for i, record in enumerate(parsed):
        if record is None:
            break  # state beyond an unreadable record is unknowable
        try:
            state, completed_recorded = _apply_event(
                state, completed_recorded, record.event
            )
        except InvalidOpening as exc:
            findings.openings.append((i, str(exc)))
            break
        except _OutcomeMismatch as exc:
            findings.outcome.append((i, str(exc)))
            break
        except FairdrawError as exc:
            findings.phase.append((i, str(exc)))
            break

    recomputed = None
    if state is not None and state.phase is Phase.COMPLETE and state.outcome is not None:
        recomputed = state.outcome.n

    return VerificationReport(
        chain_ok=not findings.chain,
        phase_order_ok=not findings.phase,
        openings_ok=not findings.openings,
        outcome_ok=not findings.outcome,
        recomputed_outcome=recomputed,
        findings=findings.merged(),
    )


def load_transcript(data: Union[bytes, str]) -> Transcript:
    """Parse and fully verify serialized records into a live Transcript.

    Raises TranscriptError unless verification is clean; loading never
    repairs anything.
    """
    report = verify_transcript(data)
    if not report.all_ok:
        seq, desc = report.findings[0]
        raise TranscriptError(
            f"transcript failed verification at seq {seq}: {desc}"
            + (f" (+{len(report.findings) - 1} more findings)" if len(report.findings) > 1 else "")
        )
    if isinstance(data, str):
        data = data.encode("utf-8")
    t = Transcript()
    for raw in _parse_lines(data):
        record = record_from_json(json.loads(raw.decode("utf-8")))
        t = t.append(record.event)
    return t
