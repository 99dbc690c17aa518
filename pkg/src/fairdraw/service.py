"""HTTP coordination service for commit-reveal ceremonies.

The service is deliberately untrusted: it orders submissions, enforces
deadlines, and persists the transcript, but every response can be
re-checked offline from the transcript alone.  State is kept as one
append-only JSONL transcript per session under the data directory;
every mutation is flushed and fsynced before the response is sent, so a
crash can lose at most an unacknowledged request.

Endpoints (JSON bodies unless noted):

    POST /v1/ceremonies                         create; returns tokens
    GET  /v1/ceremonies/{id}                    state snapshot
    POST /v1/ceremonies/{id}/commitments        submit digest (Bearer auth)
    POST /v1/ceremonies/{id}/reveals            submit opening (Bearer auth)
    POST /v1/ceremonies/{id}/abort              abort (Bearer auth)
    GET  /v1/ceremonies/{id}/transcript         raw transcript JSONL
    GET  /v1/ceremonies/{id}/events?from_seq=N  Server-Sent Events stream

Transcripts found corrupt at startup are quarantined: still downloadable
(with a corruption warning header), never mutated, never repaired.
"""

import argparse
import json
import logging
import os
import re
import secrets
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from typing import Dict, Optional, Tuple
from urllib.parse import parse_qs, urlparse

from .ceremony import DrawSpec, Phase, roster_statuses, selected_candidate
from .draw import Modulus
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
    UnknownStakeholder,
)
from .transcript import (
    Aborted,
    CeremonyCreated,
    CommitmentSubmitted,
    Completed,
    OpeningRejected,
    RevealSubmitted,
    Transcript,
    load_transcript,
    record_to_json,
    record_to_line,
    verify_transcript,
)

log = logging.getLogger("fairdraw.service")

SESSION_ID_RE = re.compile(r"\A[A-Za-z0-9][A-Za-z0-9._-]{0,127}\Z")
TOKEN_BYTES = 16
CORRUPTION_HEADER = "X-Fairdraw-Corruption"

DEFAULT_COMMIT_WINDOW_MIN = 24 * 60
DEFAULT_REVEAL_WINDOW_MIN = 24 * 60


def now_ms() -> int:
    return int(time.time() * 1000)


class AuthError(FairdrawError):
    code = "auth_required"


class ForbiddenError(FairdrawError):
    code = "forbidden"


class UnknownSession(FairdrawError):
    code = "unknown_session"


class DuplicateSession(FairdrawError):
    code = "duplicate_session"


class QuarantinedSession(FairdrawError):
    code = "quarantined"


class _Session:
    """One ceremony: its transcript, tokens, and a lock serializing writes."""

    def __init__(self, session_id: str, directory: str):
        self.session_id = session_id
        self.directory = directory
        self.lock = threading.Lock()
        self.changed = threading.Condition(self.lock)
        self.transcript = Transcript()
        self.tokens: Dict[str, str] = {}  # stakeholder id -> bearer token
        self.rejections: Dict[str, int] = {}
        self.corruption: Optional[str] = None

    @property
    def transcript_path(self) -> str:
        return os.path.join(self.directory, "transcript.jsonl")

    @property
    def tokens_path(self) -> str:
        return os.path.join(self.directory, "tokens.json")


def _fsync_dir(path: str) -> None:
    fd = os.open(path, os.O_RDONLY)
    try:
        os.fsync(fd)
    finally:
        os.close(fd)


class Registry:
    """All sessions served from one data directory."""

    def __init__(
        self,
        data_dir: str,
        commit_window_ms: int = DEFAULT_COMMIT_WINDOW_MIN * 60_000,
        reveal_window_ms: int = DEFAULT_REVEAL_WINDOW_MIN * 60_000,
        clock=now_ms,
    ):
        self.data_dir = data_dir
        self.commit_window_ms = commit_window_ms
        self.reveal_window_ms = reveal_window_ms
        self.clock = clock
        self.sessions: Dict[str, _Session] = {}
        self._create_lock = threading.Lock()
        os.makedirs(data_dir, exist_ok=True)
        self._load_all()

    # -- persistence --------------------------------------------------

    def _load_all(self) -> None:
        for name in sorted(os.listdir(self.data_dir)):
            directory = os.path.join(self.data_dir, name)
            if not os.path.isdir(directory) or not SESSION_ID_RE.match(name):
                continue
            sess = _Session(name, directory)
            try:
                with open(sess.transcript_path, "rb") as f:
                    data = f.read()
            except FileNotFoundError:
                continue
            report = verify_transcript(data)
            if not report.all_ok:
                seq, desc = report.findings[0]
                sess.corruption = f"seq {seq}: {desc}"
                log.warning("quarantined session %s (%s)", name, sess.corruption)
                self.sessions[name] = sess
                continue
            sess.transcript = load_transcript(data)
            try:
                with open(sess.tokens_path, "r", encoding="utf-8") as f:
                    sess.tokens = dict(json.load(f)["tokens"])
            except (OSError, ValueError, KeyError, TypeError) as exc:
                sess.corruption = f"token store unreadable: {exc}"
                log.warning("quarantined session %s (%s)", name, sess.corruption)
                self.sessions[name] = sess
                continue
            for record in sess.transcript.records:
                if isinstance(record.event, OpeningRejected):
                    sid = record.event.stakeholder_id
                    sess.rejections[sid] = sess.rejections.get(sid, 0) + 1
            # A crash can land between the final reveal and its completed
            # record; the outcome is already determined, so finish the log.
            state = sess.transcript.state
            if (
                state is not None
                and state.phase is Phase.COMPLETE
                and not sess.transcript.completed_recorded
            ):
                with sess.lock:
                    self._append(sess, Completed(outcome=state.outcome.n))
            self.sessions[name] = sess
            log.info("loaded session %s (%s)", name, sess.transcript.state.phase.value)

    def _append(self, sess: _Session, event) -> None:
        """Append one event: validate, write, fsync, then publish in memory."""
        new_transcript = sess.transcript.append(event)
        record = new_transcript.records[-1]
        line = record_to_line(record).encode("utf-8") + b"\n"
        with open(sess.transcript_path, "ab") as f:
            f.write(line)
            f.flush()
            os.fsync(f.fileno())
        sess.transcript = new_transcript
        if isinstance(event, OpeningRejected):
            sid = event.stakeholder_id
            sess.rejections[sid] = sess.rejections.get(sid, 0) + 1
        sess.changed.notify_all()

    # -- helpers -------------------------------------------------------

    def _get(self, session_id: str) -> _Session:
        sess = self.sessions.get(session_id)
        if sess is None:
            raise UnknownSession(f"no such session {session_id!r}")
        return sess

    def _get_live(self, session_id: str) -> _Session:
        sess = self._get(session_id)
        if sess.corruption is not None:
            raise QuarantinedSession(
                f"session {session_id!r} is quarantined: {sess.corruption}"
            )
        return sess

    @staticmethod
    def _authenticate(sess: _Session, token: Optional[str]) -> str:
        if not token:
            raise AuthError("missing bearer token")
        for sid, expected in sess.tokens.items():
            if secrets.compare_digest(expected, token):
                return sid
        raise AuthError("unrecognized bearer token")

    def _expire_if_due(self, sess: _Session) -> Optional[str]:
        """Abort a session whose current-phase deadline has passed (lock held)."""
        state = sess.transcript.state
        if state is None:
            return None
        now = self.clock()
        spec = state.spec
        if (
            state.phase is Phase.COMMIT
            and spec.commit_deadline is not None
            and now > spec.commit_deadline
        ):
            reason = "commit deadline expired"
        elif (
            state.phase is Phase.REVEAL
            and spec.reveal_deadline is not None
            and now > spec.reveal_deadline
        ):
            reason = "reveal deadline expired"
        else:
            return None
        self._append(sess, Aborted(reason=reason))
        return reason

    # -- operations ----------------------------------------------------

    def create(self, body: dict) -> Tuple[str, Dict[str, str], dict]:
        session_id = body.get("session_id")
        if not isinstance(session_id, str) or not SESSION_ID_RE.match(session_id):
            raise ConfigurationError(
                "session_id must be 1-128 characters of [A-Za-z0-9._-], "
                "starting with a letter or digit"
            )
        modulus = body.get("modulus")
        if not isinstance(modulus, int) or isinstance(modulus, bool):
            raise ConfigurationError("modulus must be an integer")
        roster = body.get("roster")
        if not isinstance(roster, list) or not all(isinstance(s, str) for s in roster):
            raise ConfigurationError("roster must be a list of stakeholder ids")
        candidates = body.get("candidates")
        if candidates is not None and (
            not isinstance(candidates, list)
            or not all(isinstance(c, str) for c in candidates)
        ):
            raise ConfigurationError("candidates must be a list of labels")
        metadata = body.get("metadata", "")
        if not isinstance(metadata, str):
            raise ConfigurationError("metadata must be a string")
        predecessor = body.get("predecessor")
        if predecessor is not None and not isinstance(predecessor, str):
            raise ConfigurationError("predecessor must be a string")

        now = self.clock()
        commit_deadline = body.get("commit_deadline", now + self.commit_window_ms)
        reveal_deadline = body.get("reveal_deadline", now + self.reveal_window_ms)
        spec = DrawSpec(
            session_id=session_id,
            modulus=Modulus(modulus),
            roster=tuple(roster),
            candidates=tuple(candidates) if candidates is not None else None,
            metadata=metadata,
            commit_deadline=commit_deadline,
            reveal_deadline=reveal_deadline,
            predecessor=predecessor,
        )

        with self._create_lock:
            if session_id in self.sessions:
                raise DuplicateSession(f"session {session_id!r} already exists")
            directory = os.path.join(self.data_dir, session_id)
            try:
                os.makedirs(directory, exist_ok=False)
            except FileExistsError:
                raise DuplicateSession(
                    f"session directory {session_id!r} already exists on disk"
                )
            sess = _Session(session_id, directory)
            sess.tokens = {sid: secrets.token_hex(TOKEN_BYTES) for sid in spec.roster}
            fd = os.open(
                sess.tokens_path, os.O_WRONLY | os.O_CREAT | os.O_EXCL, 0o600
            )
            with os.fdopen(fd, "w", encoding="utf-8") as f:
                json.dump({"session_id": session_id, "tokens": sess.tokens}, f)
                f.flush()
                os.fsync(f.fileno())
            with sess.lock:
                self._append(sess, CeremonyCreated.from_spec(spec))
            _fsync_dir(directory)
            _fsync_dir(self.data_dir)
            self.sessions[session_id] = sess
        return session_id, dict(sess.tokens), self.snapshot(session_id)

    def snapshot(self, session_id: str) -> dict:
        sess = self._get_live(session_id)
        with sess.lock:
            self._expire_if_due(sess)
            state = sess.transcript.state
            assert state is not None
            spec = state.spec
            reveal_visible = state.phase in (Phase.COMPLETE, Phase.REVEAL)
            stakeholders = {}
            for sid, status in roster_statuses(state).items():
                entry: dict = {"status": status}
                digest = state.commitments.get(sid)
                entry["digest"] = digest.hex() if digest is not None else None
                opening = state.reveals.get(sid) if reveal_visible else None
                entry["value"] = opening.value.n if opening is not None else None
                entry["rejections"] = sess.rejections.get(sid, 0)
                stakeholders[sid] = entry
            return {
                "session_id": spec.session_id,
                "phase": state.phase.value,
                "modulus": spec.modulus.m,
                "metadata": spec.metadata,
                "roster": list(spec.roster),
                "commit_deadline": spec.commit_deadline,
                "reveal_deadline": spec.reveal_deadline,
                "predecessor": spec.predecessor,
                "stakeholders": stakeholders,
                "outcome": state.outcome.n if state.outcome is not None else None,
                "selected_candidate": selected_candidate(state),
                "abort_reason": state.abort_reason,
                "successor_hint": state.successor_hint,
                "last_seq": sess.transcript.last_seq,
            }

    def submit_commitment(self, session_id: str, token: Optional[str], body: dict) -> dict:
        sess = self._get_live(session_id)
        stakeholder_id = self._authenticate(sess, token)
        claimed = body.get("stakeholder_id")
        if claimed is not None and claimed != stakeholder_id:
            raise ForbiddenError(
                f"token belongs to {stakeholder_id!r}, not {claimed!r}"
            )
        digest_hex = body.get("digest")
        if not isinstance(digest_hex, str) or not re.fullmatch(
            r"[0-9a-f]{64}", digest_hex
        ):
            raise EncodingError("digest must be 64 lowercase hex digits")
        with sess.lock:
            expired = self._expire_if_due(sess)
            if expired:
                raise DeadlineExpired(expired)
            try:
                self._append(
                    sess,
                    CommitmentSubmitted(
                        stakeholder_id=stakeholder_id,
                        digest=bytes.fromhex(digest_hex),
                        timestamp=self.clock(),
                    ),
                )
            except DeadlineExpired:
                self._append(sess, Aborted(reason="commit deadline expired"))
                raise
        return self.snapshot(session_id)

    def submit_reveal(self, session_id: str, token: Optional[str], body: dict) -> dict:
        sess = self._get_live(session_id)
        stakeholder_id = self._authenticate(sess, token)
        claimed = body.get("stakeholder_id")
        if claimed is not None and claimed != stakeholder_id:
            raise ForbiddenError(
                f"token belongs to {stakeholder_id!r}, not {claimed!r}"
            )
        value = body.get("value")
        if not isinstance(value, int) or isinstance(value, bool) or value < 0:
            raise EncodingError("value must be a non-negative integer")
        mask_hex = body.get("mask")
        if not isinstance(mask_hex, str) or not re.fullmatch(r"[0-9a-f]{64}", mask_hex):
            raise EncodingError("mask must be 64 lowercase hex digits")
        with sess.lock:
            expired = self._expire_if_due(sess)
            if expired:
                raise DeadlineExpired(expired)
            state = sess.transcript.state
            assert state is not None
            if state.phase is Phase.REVEAL and value >= state.spec.modulus.m:
                raise OutOfRange(
                    f"value {value} is outside [0, {state.spec.modulus.m})"
                )
            prior = state.reveals.get(stakeholder_id)
            if prior is not None:
                if prior.value.n != value or prior.mask.data.hex() != mask_hex:
                    raise InvalidOpening("a different opening was already revealed")
                # identical resubmission: nothing to record
            else:
                event = RevealSubmitted(
                    stakeholder_id=stakeholder_id,
                    value=value,
                    mask=bytes.fromhex(mask_hex),
                    timestamp=self.clock(),
                )
                try:
                    self._append(sess, event)
                except InvalidOpening as exc:
                    self._append(
                        sess,
                        OpeningRejected(
                            stakeholder_id=stakeholder_id,
                            reason=str(exc),
                            timestamp=self.clock(),
                        ),
                    )
                    raise
                except DeadlineExpired:
                    self._append(sess, Aborted(reason="reveal deadline expired"))
                    raise
                new_state = sess.transcript.state
                if new_state.phase is Phase.COMPLETE:
                    self._append(sess, Completed(outcome=new_state.outcome.n))
        return self.snapshot(session_id)

    def abort(self, session_id: str, token: Optional[str], body: dict) -> dict:
        sess = self._get_live(session_id)
        self._authenticate(sess, token)  # any roster member may abort
        reason = body.get("reason")
        if not isinstance(reason, str) or not reason.strip():
            raise ConfigurationError("abort requires a non-empty reason")
        hint = body.get("successor_hint")
        if hint is not None and not isinstance(hint, str):
            raise ConfigurationError("successor_hint must be a string")
        with sess.lock:
            self._expire_if_due(sess)
            self._append(sess, Aborted(reason=reason, successor_hint=hint))
        return self.snapshot(session_id)

    def transcript_bytes(self, session_id: str) -> Tuple[bytes, Optional[str]]:
        sess = self._get(session_id)
        with sess.lock:
            try:
                with open(sess.transcript_path, "rb") as f:
                    return f.read(), sess.corruption
            except FileNotFoundError:
                return b"", sess.corruption

    def sweep(self) -> None:
        """Abort any session whose current deadline has lapsed."""
        for sess in list(self.sessions.values()):
            if sess.corruption is not None:
                continue
            with sess.lock:
                try:
                    self._expire_if_due(sess)
                except FairdrawError:
                    log.exception("sweep failed for %s", sess.session_id)


# ---------------------------------------------------------------------------
# HTTP layer

_ERROR_STATUS = {
    ConfigurationError: 400,
    DomainError: 400,
    EncodingError: 400,
    OutOfRange: 400,
    AuthError: 401,
    ForbiddenError: 403,
    UnknownStakeholder: 403,
    UnknownSession: 404,
    DuplicateSession: 409,
    DuplicateCommitment: 409,
    PhaseViolation: 409,
    DeadlineExpired: 409,
    QuarantinedSession: 409,
    InvalidOpening: 422,
}


def _status_for(exc: FairdrawError) -> int:
    for cls in type(exc).__mro__:
        if cls in _ERROR_STATUS:
            return _ERROR_STATUS[cls]
    return 400


class ServiceServer(ThreadingHTTPServer):
    daemon_threads = True
    allow_reuse_address = True

    def __init__(self, address, registry: Registry):
        super().__init__(address, _Handler)
        self.registry = registry


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: ServiceServer

    _ROUTES_GET = [
        (re.compile(r"\A/v1/ceremonies/([^/]+)/transcript\Z"), "get_transcript"),
        (re.compile(r"\A/v1/ceremonies/([^/]+)/events\Z"), "get_events"),
        (re.compile(r"\A/v1/ceremonies/([^/]+)\Z"), "get_state"),
        (re.compile(r"\A/healthz\Z"), "get_health"),
    ]
    _ROUTES_POST = [
        (re.compile(r"\A/v1/ceremonies\Z"), "post_create"),
        (re.compile(r"\A/v1/ceremonies/([^/]+)/commitments\Z"), "post_commitment"),
        (re.compile(r"\A/v1/ceremonies/([^/]+)/reveals\Z"), "post_reveal"),
        (re.compile(r"\A/v1/ceremonies/([^/]+)/abort\Z"), "post_abort"),
    ]

    def log_message(self, fmt, *args):
        log.debug("%s %s", self.address_string(), fmt % args)

    # -- plumbing -------------------------------------------------------

    @property
    def registry(self) -> Registry:
        return self.server.registry

    def _bearer_token(self) -> Optional[str]:
        header = self.headers.get("Authorization", "")
        if header.startswith("Bearer "):
            return header[len("Bearer "):].strip()
        return None

    def _read_body(self) -> dict:
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b""
        if not raw:
            return {}
        try:
            body = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError):
            raise EncodingError("request body must be a JSON object")
        if not isinstance(body, dict):
            raise EncodingError("request body must be a JSON object")
        return body

    def _send_json(self, status: int, payload: dict, extra_headers=()) -> None:
        data = json.dumps(payload).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json")
        self.send_header("Content-Length", str(len(data)))
        for name, value in extra_headers:
            self.send_header(name, value)
        self.end_headers()
        self.wfile.write(data)

    def _send_error_json(self, exc: FairdrawError) -> None:
        self._send_json(_status_for(exc), {"error": exc.code, "detail": str(exc)})

    def _dispatch(self, routes) -> None:
        url = urlparse(self.path)
        for pattern, name in routes:
            match = pattern.match(url.path)
            if match:
                try:
                    getattr(self, name)(*match.groups(), query=parse_qs(url.query))
                except FairdrawError as exc:
                    self._send_error_json(exc)
                except (BrokenPipeError, ConnectionResetError):
                    self.close_connection = True
                except Exception:
                    log.exception("unhandled error serving %s", self.path)
                    self._send_json(500, {"error": "internal", "detail": "internal error"})
                return
        self._send_json(404, {"error": "not_found", "detail": f"no route for {url.path}"})

    def do_GET(self):
        self._dispatch(self._ROUTES_GET)

    def do_POST(self):
        self._dispatch(self._ROUTES_POST)

    # -- handlers ---------------------------------------------------------

    def get_health(self, query=None):
        self._send_json(200, {"status": "ok"})

    def post_create(self, query=None):
        body = self._read_body()
        session_id, tokens, snapshot = self.registry.create(body)
        self._send_json(
            201, {"session_id": session_id, "tokens": tokens, "state": snapshot}
        )

    def get_state(self, session_id, query=None):
        self._send_json(200, self.registry.snapshot(session_id))

    def post_commitment(self, session_id, query=None):
        body = self._read_body()
        snapshot = self.registry.submit_commitment(
            session_id, self._bearer_token(), body
        )
        self._send_json(200, snapshot)

    def post_reveal(self, session_id, query=None):
        body = self._read_body()
        snapshot = self.registry.submit_reveal(session_id, self._bearer_token(), body)
        self._send_json(200, snapshot)

    def post_abort(self, session_id, query=None):
        body = self._read_body()
        snapshot = self.registry.abort(session_id, self._bearer_token(), body)
        self._send_json(200, snapshot)

    def get_transcript(self, session_id, query=None):
        data, corruption = self.registry.transcript_bytes(session_id)
        self.send_response(200)
        self.send_header("Content-Type", "application/x-ndjson")
        self.send_header("Content-Length", str(len(data)))
        if corruption is not None:
            self.send_header(CORRUPTION_HEADER, corruption)
        self.end_headers()
        self.wfile.write(data)

    def get_events(self, session_id, query=None):
        """Stream transcript records as Server-Sent Events."""
        registry = self.registry
        sess = registry._get(session_id)
        if sess.corruption is not None:
            raise QuarantinedSession(
                f"session {session_id!r} is quarantined: {sess.corruption}"
            )
        try:
            cursor = int((query or {}).get("from_seq", ["0"])[0])
        except ValueError:
            raise EncodingError("from_seq must be an integer")
        if cursor < 0:
            cursor = 0

        self.send_response(200)
        self.send_header("Content-Type", "text/event-stream")
        self.send_header("Cache-Control", "no-cache")
        self.send_header("Connection", "close")
        self.end_headers()
        self.close_connection = True

        while True:
            with sess.lock:
                registry._expire_if_due(sess)
                records = sess.transcript.records[cursor:]
                if not records:
                    done = sess.transcript.completed_recorded or (
                        sess.transcript.state is not None
                        and sess.transcript.state.phase is Phase.ABORTED
                    )
                    if done:
                        return
                    sess.changed.wait(timeout=15.0)
                    records = sess.transcript.records[cursor:]
            for record in records:
                payload = json.dumps(record_to_json(record))
                chunk = f"id: {record.seq}\ndata: {payload}\n\n"
                self.wfile.write(chunk.encode("utf-8"))
                cursor = record.seq + 1
            if records:
                self.wfile.flush()
            else:
                self.wfile.write(b": keepalive\n\n")
                self.wfile.flush()


def serve(registry: Registry, host: str = "127.0.0.1", port: int = 0) -> ServiceServer:
    """Bind a server (port 0 picks a free port); caller runs serve_forever."""
    return ServiceServer((host, port), registry)


def _sweeper(registry: Registry, interval: float, stop: threading.Event) -> None:
    while not stop.wait(interval):
        registry.sweep()


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="fairdraw-server",
        description="Coordination service for commit-reveal randomization ceremonies.",
    )
    parser.add_argument(
        "--listen",
        default=os.environ.get("FAIRDRAW_LISTEN", "127.0.0.1:8440"),
        help="host:port to bind (default 127.0.0.1:8440)",
    )
    parser.add_argument(
        "--data-dir",
        default=os.environ.get("FAIRDRAW_DATA_DIR", "./fairdraw-data"),
        help="directory for transcripts and token stores",
    )
    parser.add_argument(
        "--commit-window-min",
        type=int,
        default=int(os.environ.get("FAIRDRAW_COMMIT_WINDOW_MIN", DEFAULT_COMMIT_WINDOW_MIN)),
        help="default commit deadline, minutes from creation",
    )
    parser.add_argument(
        "--reveal-window-min",
        type=int,
        default=int(os.environ.get("FAIRDRAW_REVEAL_WINDOW_MIN", DEFAULT_REVEAL_WINDOW_MIN)),
        help="default reveal deadline, minutes from creation",
    )
    parser.add_argument(
        "--sweep-interval",
        type=float,
        default=float(os.environ.get("FAIRDRAW_SWEEP_INTERVAL", "1.0")),
        help="seconds between deadline sweeps",
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )

    host, _, port_text = args.listen.rpartition(":")
    if not host or not port_text.isdigit():
        parser.error("--listen must look like HOST:PORT")
    registry = Registry(
        data_dir=args.data_dir,
        commit_window_ms=args.commit_window_min * 60_000,
        reveal_window_ms=args.reveal_window_min * 60_000,
    )
    server = serve(registry, host, int(port_text))
    stop = threading.Event()
    threading.Thread(
        target=_sweeper, args=(registry, args.sweep_interval, stop), daemon=True
    ).start()

    bound_host, bound_port = server.server_address[:2]
    print(f"fairdraw-server listening on http://{bound_host}:{bound_port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        stop.set()
        server.server_close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
