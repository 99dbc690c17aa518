"""Thin HTTP client for the coordination service."""

import json
from typing import Iterator, Optional, Tuple

import requests

from .errors import FairdrawError


class ServiceError(FairdrawError):
    """An error response from the coordination service."""

    def __init__(self, status: int, code: str, detail: str):
        super().__init__(detail)
        self.status = status
        self.code = code


class TransportError(FairdrawError):
    """The service could not be reached or answered garbage."""

    code = "transport_error"


def _raise_for(response: requests.Response) -> None:
    if response.status_code < 400:
        return
    try:
        body = response.json()
        code = body["error"]
        detail = body.get("detail", code)
    except (ValueError, KeyError, TypeError):
        code = "http_error"
        detail = f"HTTP {response.status_code}"
    raise ServiceError(response.status_code, code, detail)


class ServiceClient:
    def __init__(self, base_url: str, timeout: float = 10.0):
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self._http = requests.Session()

    def _url(self, path: str) -> str:
        return f"{self.base_url}{path}"

    @staticmethod
    def _auth(token: Optional[str]) -> dict:
        return {"Authorization": f"Bearer {token}"} if token else {}

    def _post(self, path: str, body: dict, token: Optional[str] = None) -> dict:
        try:
            response = self._http.post(
                self._url(path),
                json=body,
                headers=self._auth(token),
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(f"request to {path} failed: {exc}")
        _raise_for(response)
        return response.json()

    def _get(self, path: str) -> dict:
        try:
            response = self._http.get(self._url(path), timeout=self.timeout)
        except requests.RequestException as exc:
            raise TransportError(f"request to {path} failed: {exc}")
        _raise_for(response)
        return response.json()

    # -- API ------------------------------------------------------------

    def create_ceremony(self, spec: dict) -> dict:
        """Create a session; returns {"session_id", "tokens", "state"}."""
        return self._post("/v1/ceremonies", spec)

    def state(self, session_id: str) -> dict:
        return self._get(f"/v1/ceremonies/{session_id}")

    def submit_commitment(
        self,
        session_id: str,
        token: str,
        digest_hex: str,
        stakeholder_id: Optional[str] = None,
    ) -> dict:
        """Submit a digest; a stakeholder_id claim lets the server 403 early
        if the token belongs to someone else."""
        body: dict = {"digest": digest_hex}
        if stakeholder_id is not None:
            body["stakeholder_id"] = stakeholder_id
        return self._post(
            f"/v1/ceremonies/{session_id}/commitments", body, token=token
        )

    def submit_reveal(
        self,
        session_id: str,
        token: str,
        value: int,
        mask_hex: str,
        stakeholder_id: Optional[str] = None,
    ) -> dict:
        body: dict = {"value": value, "mask": mask_hex}
        if stakeholder_id is not None:
            body["stakeholder_id"] = stakeholder_id
        return self._post(f"/v1/ceremonies/{session_id}/reveals", body, token=token)

    def abort(
        self,
        session_id: str,
        token: str,
        reason: str,
        successor_hint: Optional[str] = None,
    ) -> dict:
        body: dict = {"reason": reason}
        if successor_hint is not None:
            body["successor_hint"] = successor_hint
        return self._post(f"/v1/ceremonies/{session_id}/abort", body, token=token)

    def transcript_bytes(self, session_id: str) -> Tuple[bytes, Optional[str]]:
        """Raw transcript plus the corruption warning header, if any."""
        try:
            response = self._http.get(
                self._url(f"/v1/ceremonies/{session_id}/transcript"),
                timeout=self.timeout,
            )
        except requests.RequestException as exc:
            raise TransportError(f"transcript fetch failed: {exc}")
        _raise_for(response)
        return response.content, response.headers.get("X-Fairdraw-Corruption")

    def events(self, session_id: str, from_seq: int = 0) -> Iterator[dict]:
        """Yield transcript records from the event stream, starting at from_seq.

        Reconnects transparently if the stream drops mid-ceremony; ends
        when the ceremony reaches a terminal record.
        """
        cursor = from_seq
        while True:
            try:
                response = self._http.get(
                    self._url(f"/v1/ceremonies/{session_id}/events"),
                    params={"from_seq": cursor},
                    stream=True,
                    timeout=(self.timeout, None),
                )
            except requests.RequestException as exc:
                raise TransportError(f"event stream failed: {exc}")
            _raise_for(response)
            saw_terminal = False
            try:
                for record in _parse_sse(response):
                    cursor = record["seq"] + 1
                    event_type = record["event"]["type"]
                    saw_terminal = event_type in ("completed", "aborted")
                    yield record
            except requests.RequestException:
                continue  # dropped mid-stream; resume from cursor
            finally:
                response.close()
            if saw_terminal:
                return
            # Clean close without a terminal record: the stream may have
            # started past the end of a finished ceremony.
            if self.state(session_id).get("phase") in ("complete", "aborted"):
                return


def _parse_sse(response) -> Iterator[dict]:
    """Decode Server-Sent Events into record dicts; ignores comments."""
    data_lines = []
    for raw in response.iter_lines(decode_unicode=False):
        if raw is None:
            continue
        if raw == b"":
            if data_lines:
                payload = b"\n".join(data_lines).decode("utf-8")
                data_lines = []
                yield json.loads(payload)
            continue
        if raw.startswith(b":"):
            continue
        if raw.startswith(b"data:"):
            data_lines.append(raw[len(b"data:"):].lstrip(b" "))
        # id: lines are redundant with the record's own seq field
