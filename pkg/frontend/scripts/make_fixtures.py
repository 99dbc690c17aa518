"""Regenerate the cross-component test fixtures.

The JSON/JSONL files under tests/fixtures/ are the shared ground truth
between the Python package and this client: commitment digests and
transcripts produced by the Python implementation, re-verified by the
TypeScript one (and vice versa, by tests/test_cross_component.py on the
Python side). Deterministic by construction; run from anywhere:

    python3 frontend/scripts/make_fixtures.py
"""

import hashlib
import json
import os

from fairdraw.commitment import Mask, commit
from fairdraw.draw import contribution
from fairdraw.transcript import (
    Aborted,
    CeremonyCreated,
    CommitmentSubmitted,
    Completed,
    OpeningRejected,
    RevealSubmitted,
    Transcript,
    make_record,
    record_to_line,
    transcript_from_events,
)

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "..", "tests", "fixtures")

T0 = 1_700_000_000_000


def mask_for(label: str) -> Mask:
    return Mask(hashlib.sha256(f"mask:{label}".encode()).digest())


def write(name: str, data: bytes) -> None:
    path = os.path.join(FIXTURES, name)
    with open(path, "wb") as f:
        f.write(data)
    print(f"wrote {os.path.relpath(path)} ({len(data)} bytes)")


def commit_vectors() -> None:
    cases = [
        ("S", "0", 1_610_027, 10_000_000, Mask(bytes(32))),
        ("assembly", "registrar", 1_610_027, 10_000_000, mask_for("registrar")),
        ("assembly", "defense", 5_871_032, 10_000_000, mask_for("defense")),
        ("assembly", "prosecution", 6_029_108, 10_000_000, mask_for("prosecution")),
        ("assembly", "court-clerk", 7_664_824, 10_000_000, mask_for("court-clerk")),
        ("assembly", "observer", 5_757_989, 10_000_000, mask_for("observer")),
        ("petit-jury", "greffière", 11, 12, mask_for("accent")),
        ("裁判", "証人", 0, 2, mask_for("cjk")),
        ("edge", "x" * 255, 0, 2, mask_for("long-id")),
        ("edge", "zero", 0, 10_000_000, Mask(bytes(32))),
        ("edge", "top", 9_999_999, 10_000_000, mask_for("top")),
        ("edge", "max-modulus", 2**63 - 2, 2**63 - 1, mask_for("max")),
        ("edge", "ff", 255, 256, Mask(b"\xff" * 32)),
    ]
    vectors = []
    for session_id, stakeholder_id, value, modulus, mask in cases:
        digest = commit(session_id, stakeholder_id, contribution(value, modulus), mask)
        vectors.append(
            {
                "session_id": session_id,
                "stakeholder_id": stakeholder_id,
                "value": str(value),
                "modulus": str(modulus),
                "mask": mask.data.hex(),
                "digest": digest.hex(),
            }
        )
    write(
        "commit-vectors.json",
        json.dumps(vectors, indent=2, ensure_ascii=False).encode() + b"\n",
    )


def five_party_events():
    values = {
        "registrar": 1_610_027,
        "defense": 5_871_032,
        "prosecution": 6_029_108,
        "court-clerk": 7_664_824,
        "observer": 5_757_989,
    }
    m = 10_000_000
    events = [CeremonyCreated(session_id="assembly", modulus=m, roster=tuple(values))]
    for sid, n in values.items():
        digest = commit("assembly", sid, contribution(n, m), mask_for(sid))
        events.append(CommitmentSubmitted(sid, digest.data, T0))
    for sid, n in values.items():
        events.append(RevealSubmitted(sid, n, mask_for(sid).data, T0 + 1))
    events.append(Completed(sum(values.values()) % m))
    return events


def transcripts() -> None:
    write("transcript-complete.jsonl", transcript_from_events(five_party_events()).to_bytes())

    aborted = [
        CeremonyCreated(session_id="halted", modulus=100, roster=("a", "b", "c")),
        CommitmentSubmitted(
            "a", commit("halted", "a", contribution(5, 100), mask_for("ha")).data, T0
        ),
        Aborted(reason="stakeholder c unreachable", successor_hint="halted-2"),
    ]
    write("transcript-aborted.jsonl", transcript_from_events(aborted).to_bytes())

    # every optional field in play, plus an informational rejection
    pool = tuple(f"juror-{i}" for i in range(10))
    events = [
        CeremonyCreated(
            session_id="variants",
            modulus=10,
            roster=("a", "b"),
            candidates=pool,
            metadata="district 4 panel",
            commit_deadline=T0 + 60_000,
            reveal_deadline=T0 + 120_000,
            predecessor="variants-0",
        ),
        CommitmentSubmitted("a", commit("variants", "a", contribution(7, 10), mask_for("va")).data, T0),
        CommitmentSubmitted("b", commit("variants", "b", contribution(6, 10), mask_for("vb")).data, T0 + 1),
        OpeningRejected("a", "digest mismatch", T0 + 2),
        RevealSubmitted("a", 7, mask_for("va").data, T0 + 3),
        RevealSubmitted("b", 6, mask_for("vb").data, T0 + 4),
        Completed(3),
    ]
    write("transcript-variants.jsonl", transcript_from_events(events).to_bytes())

    # chain-consistent forgeries: hashes are right, semantics are wrong
    forged = five_party_events()
    forged[-1] = Completed(1_234_567)
    write("transcript-forged-outcome.jsonl", forge(forged))

    early = five_party_events()
    early[2], early[6] = early[6], early[2]  # a reveal jumps the queue
    write("transcript-early-reveal.jsonl", forge(early))


def forge(events) -> bytes:
    prev = bytes(32)
    lines = []
    for i, event in enumerate(events):
        record = make_record(i, prev, event)
        prev = record.record_hash
        lines.append(record_to_line(record))
    return ("\n".join(lines) + "\n").encode()


def main() -> None:
    os.makedirs(FIXTURES, exist_ok=True)
    commit_vectors()
    transcripts()


if __name__ == "__main__":
    main()
