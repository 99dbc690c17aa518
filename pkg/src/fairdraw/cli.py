"""Command-line client for running and auditing randomization ceremonies.

Exit codes: 0 success, 1 verification or audit failure, 2 usage error,
3 protocol or service error.
"""

import argparse
import json
import os
import secrets
import sys
import time
from typing import List, Optional

from .client import ServiceClient, ServiceError, TransportError
from .commitment import Mask, Opening, commit, new_mask
from .draw import ContributionValue, Modulus
from .errors import FairdrawError, OutOfRange
from .stats import audit_outcomes
from .transcript import load_transcript, verify_transcript

EXIT_OK = 0
EXIT_VERIFICATION = 1
EXIT_USAGE = 2
EXIT_PROTOCOL = 3


class CliError(FairdrawError):
    def __init__(self, message: str, exit_code: int = EXIT_PROTOCOL):
        super().__init__(message)
        self.exit_code = exit_code


# ---------------------------------------------------------------------------
# Local secret storage.  A committed-but-unrevealed value is the one thing
# the CLI must never lose, so it is written before the digest ever leaves
# this machine, as an owner-only file.


def fairdraw_home() -> str:
    return os.environ.get(
        "FAIRDRAW_HOME", os.path.join(os.path.expanduser("~"), ".fairdraw")
    )


def _secret_path(session_id: str, stakeholder_id: str) -> str:
    return os.path.join(fairdraw_home(), "secrets", session_id, f"{stakeholder_id}.json")


def save_secret(
    session_id: str,
    stakeholder_id: str,
    value: int,
    mask: Mask,
    digest_hex: str,
    server: str,
) -> str:
    path = _secret_path(session_id, stakeholder_id)
    directory = os.path.dirname(path)
    os.makedirs(directory, mode=0o700, exist_ok=True)
    payload = {
        "session_id": session_id,
        "stakeholder_id": stakeholder_id,
        "value": value,
        "mask": mask.data.hex(),
        "digest": digest_hex,
        "server": server,
        "created_at": int(time.time() * 1000),
    }
    fd = os.open(path, os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o600)
    with os.fdopen(fd, "w", encoding="utf-8") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
    return path


def load_secret(session_id: str, stakeholder_id: str) -> dict:
    path = _secret_path(session_id, stakeholder_id)
    try:
        with open(path, "r", encoding="utf-8") as f:
            payload = json.load(f)
    except FileNotFoundError:
        raise CliError(
            f"no local secret for session {session_id!r} stakeholder "
            f"{stakeholder_id!r} (looked in {path})"
        )
    except ValueError as exc:
        raise CliError(f"secret file {path} is unreadable: {exc}")
    for key in ("session_id", "stakeholder_id", "value", "mask", "digest"):
        if key not in payload:
            raise CliError(f"secret file {path} is missing {key!r}")
    return payload


def list_secret_holders(session_id: str) -> List[str]:
    directory = os.path.join(fairdraw_home(), "secrets", session_id)
    try:
        names = os.listdir(directory)
    except FileNotFoundError:
        return []
    return sorted(n[: -len(".json")] for n in names if n.endswith(".json"))


# ---------------------------------------------------------------------------
# Value sources


def uniform_value(m: int, randbits=secrets.randbits) -> int:
    """Draw uniformly from [0, m) by rejection from 64-bit blocks."""
    limit = (2**64 // m) * m
    while True:
        x = randbits(64)
        if x < limit:
            return x % m


def read_dice_value(m: int, stdin=None, prompt_out=None) -> int:
    """Collect a value digit by digit, e.g. from a 10-sided die.

    Prompts go to stderr so stdout stays machine-readable.  Entries of
    m or more restart, which keeps the result uniform when each digit
    is uniform.
    """
    stdin = stdin if stdin is not None else sys.stdin
    prompt_out = prompt_out if prompt_out is not None else sys.stderr
    digits = len(str(m - 1))
    while True:
        chars = []
        pos = 1
        while pos <= digits:
            prompt_out.write(f"digit {pos} of {digits} (0-9): ")
            prompt_out.flush()
            line = stdin.readline()
            if line == "":
                raise CliError("input ended during dice entry")
            entry = line.strip()
            if len(entry) == 1 and entry.isdigit():
                chars.append(entry)
                pos += 1
            else:
                prompt_out.write("enter a single digit 0-9\n")
        value = int("".join(chars))
        if value < m:
            return value
        prompt_out.write(f"{value} is not below {m}; roll all digits again\n")


def resolve_value(args, m: int) -> int:
    if args.value is not None:
        if not 0 <= args.value < m:
            raise OutOfRange(f"value {args.value} is outside [0, {m})")
        return args.value
    if args.random:
        return uniform_value(m)
    return read_dice_value(m)


# ---------------------------------------------------------------------------
# Output helpers


def _emit(args, payload: dict, text: str) -> None:
    if args.output == "json":
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        print(text)


def _client(args) -> ServiceClient:
    return ServiceClient(args.server)


def _state_text(snapshot: dict) -> str:
    lines = [
        f"session:  {snapshot['session_id']}",
        f"phase:    {snapshot['phase']}",
        f"modulus:  {snapshot['modulus']}",
    ]
    if snapshot.get("metadata"):
        lines.append(f"metadata: {snapshot['metadata']}")
    for sid in snapshot["roster"]:
        entry = snapshot["stakeholders"][sid]
        parts = [f"  {sid}: {entry['status']}"]
        if entry.get("digest"):
            parts.append(f"digest={entry['digest'][:16]}...")
        if entry.get("value") is not None:
            parts.append(f"value={entry['value']}")
        if entry.get("rejections"):
            parts.append(f"rejections={entry['rejections']}")
        lines.append("  ".join(parts))
    if snapshot.get("outcome") is not None:
        lines.append(f"outcome:  {snapshot['outcome']}")
    if snapshot.get("selected_candidate") is not None:
        lines.append(f"selected: {snapshot['selected_candidate']}")
    if snapshot.get("abort_reason"):
        lines.append(f"aborted:  {snapshot['abort_reason']}")
        if snapshot.get("successor_hint"):
            lines.append(f"successor: {snapshot['successor_hint']}")
    return "\n".join(lines)


def _event_text(record: dict) -> str:
    event = record["event"]
    etype = event["type"]
    seq = record["seq"]
    if etype == "ceremony_created":
        spec = event["spec"]
        return (
            f"[{seq}] created session={spec['session_id']} "
            f"modulus={spec['modulus']} roster={','.join(spec['roster'])}"
        )
    if etype == "commitment_submitted":
        return f"[{seq}] commitment {event['stakeholder_id']} digest={event['digest'][:16]}..."
    if etype == "reveal_submitted":
        return f"[{seq}] reveal {event['stakeholder_id']} value={event['value']}"
    if etype == "opening_rejected":
        return f"[{seq}] rejected {event['stakeholder_id']}: {event['reason']}"
    if etype == "completed":
        return f"[{seq}] completed outcome={event['outcome']}"
    if etype == "aborted":
        hint = f" successor={event['successor_hint']}" if "successor_hint" in event else ""
        return f"[{seq}] aborted: {event['reason']}{hint}"
    return f"[{seq}] {etype}"


def _report_text(report) -> str:
    def mark(ok: bool) -> str:
        return "ok" if ok else "FAILED"

    lines = [
        f"chain:       {mark(report.chain_ok)}",
        f"phase order: {mark(report.phase_order_ok)}",
        f"openings:    {mark(report.openings_ok)}",
        f"outcome:     {mark(report.outcome_ok)}",
        "recomputed outcome: "
        + (str(report.recomputed_outcome) if report.recomputed_outcome is not None else "-"),
    ]
    for seq, desc in report.findings:
        lines.append(f"finding at seq {seq}: {desc}")
    lines.append("verdict: " + ("OK" if report.all_ok else "TAMPERED OR MALFORMED"))
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Commands


def cmd_create(args) -> int:
    spec: dict = {
        "session_id": args.session,
        "modulus": args.modulus,
        "roster": [s for s in args.roster.split(",") if s],
        "metadata": args.metadata,
    }
    if args.candidates is not None:
        spec["candidates"] = [c for c in args.candidates.split(",") if c]
    if args.candidates_file is not None:
        with open(args.candidates_file, "r", encoding="utf-8") as f:
            spec["candidates"] = [line.rstrip("\n") for line in f if line.strip()]
    if args.commit_deadline is not None:
        spec["commit_deadline"] = args.commit_deadline
    if args.reveal_deadline is not None:
        spec["reveal_deadline"] = args.reveal_deadline
    if args.predecessor is not None:
        spec["predecessor"] = args.predecessor
    response = _client(args).create_ceremony(spec)
    token_lines = "\n".join(
        f"  {sid}: {token}" for sid, token in response["tokens"].items()
    )
    _emit(
        args,
        response,
        f"created session {response['session_id']}\n"
        f"distribute one token to each stakeholder, then delete this output:\n"
        f"{token_lines}",
    )
    return EXIT_OK


def cmd_commit(args) -> int:
    client = _client(args)
    snapshot = client.state(args.session)
    m = snapshot["modulus"]
    if os.path.exists(_secret_path(args.session, args.stakeholder)):
        raise CliError(
            f"a secret for {args.stakeholder!r} in session {args.session!r} "
            "already exists; refusing to double-commit "
            f"(see {_secret_path(args.session, args.stakeholder)})"
        )
    value = resolve_value(args, m)
    mask = new_mask()
    digest = commit(
        args.session,
        args.stakeholder,
        ContributionValue(value, Modulus(m)),
        mask,
    )
    path = save_secret(args.session, args.stakeholder, value, mask, digest.hex(), args.server)
    try:
        response = client.submit_commitment(
            args.session, args.token, digest.hex(), stakeholder_id=args.stakeholder
        )
    except ServiceError:
        os.unlink(path)  # the service refused; nothing was recorded
        raise
    except TransportError as exc:
        raise CliError(
            f"submission outcome unknown ({exc}); the secret is kept at {path}; "
            "check `fairdraw status` before retrying"
        )
    _emit(
        args,
        {"digest": digest.hex(), "secret_path": path, "state": response},
        f"committed digest {digest.hex()}\nsecret stored at {path}",
    )
    return EXIT_OK


def cmd_reveal(args) -> int:
    stakeholder = args.stakeholder
    if stakeholder is None:
        holders = list_secret_holders(args.session)
        if len(holders) == 1:
            stakeholder = holders[0]
        elif not holders:
            raise CliError(f"no local secrets for session {args.session!r}")
        else:
            raise CliError(
                f"multiple local secrets for session {args.session!r} "
                f"({', '.join(holders)}); pass --stakeholder",
                exit_code=EXIT_USAGE,
            )
    secret = load_secret(args.session, stakeholder)
    client = _client(args)
    # Never put the value or mask on the wire until the service confirms
    # every commitment is in; a commit-phase reveal would leak the secret.
    snapshot = client.state(args.session)
    if snapshot["phase"] == "commit":
        raise CliError(
            "ceremony is still in the commit phase; revealing now would leak "
            "your value before all commitments are in"
        )
    if snapshot["phase"] == "aborted":
        raise CliError(
            f"ceremony was aborted ({snapshot.get('abort_reason')}); nothing revealed"
        )
    response = client.submit_reveal(
        args.session,
        args.token,
        secret["value"],
        secret["mask"],
        stakeholder_id=stakeholder,
    )
    lines = [f"revealed value {secret['value']}"]
    if response.get("outcome") is not None:
        lines.append(f"outcome: {response['outcome']}")
        if response.get("selected_candidate") is not None:
            lines.append(f"selected: {response['selected_candidate']}")
    else:
        waiting = [
            sid
            for sid, entry in response["stakeholders"].items()
            if entry["status"] != "revealed"
        ]
        lines.append(f"waiting for: {', '.join(waiting)}")
    if not args.keep_secret:
        os.unlink(_secret_path(args.session, stakeholder))
        lines.append("local secret deleted")
    _emit(args, {"value": secret["value"], "state": response}, "\n".join(lines))
    return EXIT_OK


def cmd_status(args) -> int:
    snapshot = _client(args).state(args.session)
    _emit(args, snapshot, _state_text(snapshot))
    return EXIT_OK


def cmd_watch(args) -> int:
    client = _client(args)
    final = None
    for record in client.events(args.session, from_seq=args.from_seq):
        if args.output == "json":
            print(json.dumps(record), flush=True)
        else:
            print(_event_text(record), flush=True)
        final = record["event"]
    if final is not None and final["type"] == "aborted" and args.output != "json":
        print(f"session aborted: {final['reason']}")
    return EXIT_OK


def cmd_abort(args) -> int:
    response = _client(args).abort(
        args.session, args.token, args.reason, successor_hint=args.successor
    )
    _emit(args, response, _state_text(response))
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.transcript is not None:
        if args.transcript == "-":
            data = sys.stdin.buffer.read()
        else:
            try:
                with open(args.transcript, "rb") as f:
                    data = f.read()
            except OSError as exc:
                raise CliError(f"cannot read transcript: {exc}")
    elif args.session is not None:
        data, corruption = _client(args).transcript_bytes(args.session)
        if corruption is not None:
            print(f"service marks this transcript corrupt: {corruption}", file=sys.stderr)
    else:
        raise CliError(
            "pass a transcript file or --session to fetch one", exit_code=EXIT_USAGE
        )
    report = verify_transcript(data)
    _emit(args, report.to_json(), _report_text(report))
    return EXIT_OK if report.all_ok else EXIT_VERIFICATION


def cmd_audit(args) -> int:
    try:
        names = os.listdir(args.directory)
    except OSError as exc:
        raise CliError(f"cannot read transcript directory: {exc}")
    paths = sorted(
        os.path.join(args.directory, name)
        for name in names
        if name.endswith(".jsonl")
    )
    if not paths:
        raise CliError(f"no .jsonl transcripts under {args.directory}")
    transcripts = []
    bad = []
    for path in paths:
        try:
            with open(path, "rb") as f:
                data = f.read()
        except OSError as exc:
            bad.append(f"{path}: {exc}")
            continue
        report = verify_transcript(data)
        if not report.all_ok:
            seq, desc = report.findings[0]
            bad.append(f"{path}: seq {seq}: {desc}")
            continue
        transcript = load_transcript(data)
        if transcript.state is None or transcript.state.outcome is None:
            bad.append(f"{path}: ceremony is not completed")
            continue
        transcripts.append(transcript)
    if bad:
        for line in bad:
            print(f"rejected {line}", file=sys.stderr)
        return EXIT_VERIFICATION
    summary = audit_outcomes(transcripts, args.bins)
    counts = " ".join(str(c) for c in summary.counts)
    _emit(
        args,
        summary.to_json(),
        (
            f"transcripts: {summary.total}\n"
            f"bins:        {summary.bins}\n"
            f"counts:      {counts}\n"
            f"statistic:   {summary.statistic:.6f}\n"
            f"dof:         {summary.dof}\n"
            f"p_value:     {summary.p_value:.6g}"
        ),
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--server",
        default=os.environ.get("FAIRDRAW_SERVER", "http://127.0.0.1:8440"),
        help="coordination service base URL",
    )
    common.add_argument(
        "--output",
        choices=("text", "json"),
        default="text",
        help="output format (default text)",
    )
    authed = argparse.ArgumentParser(add_help=False)
    authed.add_argument(
        "--token",
        default=os.environ.get("FAIRDRAW_TOKEN"),
        help="bearer token for this stakeholder (or FAIRDRAW_TOKEN)",
    )

    parser = argparse.ArgumentParser(
        prog="fairdraw",
        description="Multi-stakeholder commit-reveal randomization ceremonies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("create", parents=[common], help="create a new ceremony")
    p.add_argument("--session", required=True, help="session identifier")
    p.add_argument("--modulus", required=True, type=int, help="number of outcomes m")
    p.add_argument(
        "--roster", required=True, help="comma-separated stakeholder identifiers"
    )
    p.add_argument("--metadata", default="", help="free-text purpose of the draw")
    p.add_argument("--candidates", help="comma-separated candidate labels (m of them)")
    p.add_argument("--candidates-file", help="file with one candidate label per line")
    p.add_argument("--commit-deadline", type=int, help="epoch milliseconds")
    p.add_argument("--reveal-deadline", type=int, help="epoch milliseconds")
    p.add_argument("--predecessor", help="aborted session this one replaces")
    p.set_defaults(func=cmd_create)

    p = sub.add_parser(
        "commit", parents=[common, authed], help="commit to a hidden contribution"
    )
    p.add_argument("--session", required=True)
    p.add_argument("--stakeholder", required=True, help="your roster identifier")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--value", type=int, help="explicit contribution in [0, m)")
    source.add_argument(
        "--random", action="store_true", help="draw the contribution from the OS RNG"
    )
    source.add_argument(
        "--dice", action="store_true", help="enter the contribution digit by digit"
    )
    p.set_defaults(func=cmd_commit)

    p = sub.add_parser(
        "reveal", parents=[common, authed], help="reveal a committed contribution"
    )
    p.add_argument("--session", required=True)
    p.add_argument("--stakeholder", help="roster identifier (inferred when unambiguous)")
    p.add_argument(
        "--keep-secret",
        action="store_true",
        help="keep the local secret file after a successful reveal",
    )
    p.set_defaults(func=cmd_reveal)

    p = sub.add_parser("status", parents=[common], help="show ceremony state")
    p.add_argument("--session", required=True)
    p.set_defaults(func=cmd_status)

    p = sub.add_parser("watch", parents=[common], help="follow events until the end")
    p.add_argument("--session", required=True)
    p.add_argument("--from-seq", type=int, default=0, help="resume from this record")
    p.set_defaults(func=cmd_watch)

    p = sub.add_parser("abort", parents=[common, authed], help="abort a live ceremony")
    p.add_argument("--session", required=True)
    p.add_argument("--reason", required=True, help="why the ceremony cannot proceed")
    p.add_argument("--successor", help="session id expected to replace this one")
    p.set_defaults(func=cmd_abort)

    p = sub.add_parser("verify", parents=[common], help="re-verify a transcript")
    p.add_argument(
        "transcript", nargs="?", help="transcript file (JSONL), or - for stdin"
    )
    p.add_argument("--session", help="fetch the transcript from the service instead")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser(
        "audit", parents=[common], help="chi-square uniformity audit of a transcript set"
    )
    p.add_argument("directory", help="directory of completed transcript .jsonl files")
    p.add_argument("--bins", required=True, type=int, help="bin count; must divide m")
    p.set_defaults(func=cmd_audit)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except FairdrawError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PROTOCOL
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    raise SystemExit(main())
