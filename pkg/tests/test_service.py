"""HTTP service integration: auth, phases, SSE, durability, quarantine."""

import json
import os
import threading
import time

import pytest
import requests

from conftest import spawn_server, start_inprocess, stop_inprocess
from fairdraw.client import ServiceClient, ServiceError
from fairdraw.commitment import Mask, Opening, commit, new_mask
from fairdraw.draw import contribution
from fairdraw.transcript import (
    CeremonyCreated,
    CommitmentSubmitted,
    Completed,
    RevealSubmitted,
    transcript_from_events,
    verify_transcript,
)


def make_session(client, session_id="draw-1", m=1000, roster=("a", "b", "c"), **extra):
    body = {"session_id": session_id, "modulus": m, "roster": list(roster)}
    body.update(extra)
    created = client.create_ceremony(body)
    return created["session_id"], created["tokens"]


def commit_stakeholder(client, session_id, token, sid, n, m):
    value = contribution(n, m)
    mask = new_mask()
    digest = commit(session_id, sid, value, mask)
    state = client.submit_commitment(session_id, token, digest.hex())
    return Opening(value, mask), state


def run_full_ceremony(client, session_id, tokens, values, m):
    openings = {}
    for sid, n in values.items():
        openings[sid], _ = commit_stakeholder(
            client, session_id, tokens[sid], sid, n, m
        )
    state = None
    for sid, opening in openings.items():
        state = client.submit_reveal(
            session_id, tokens[sid], opening.value.n, opening.mask.hex()
        )
    return openings, state


# ---------------------------------------------------------------------------
# Creation and snapshots


def test_health_endpoint(service):
    response = requests.get(service.base_url + "/healthz", timeout=5)
    assert response.status_code == 200
    assert response.json()["status"] == "ok"


def test_create_returns_tokens_and_commit_phase(service):
    session_id, tokens = make_session(service.client)
    assert session_id == "draw-1"
    assert set(tokens) == {"a", "b", "c"}
    assert len(set(tokens.values())) == 3
    assert all(len(t) == 32 for t in tokens.values())

    state = service.client.state(session_id)
    assert state["phase"] == "commit"
    assert state["modulus"] == 1000
    assert state["roster"] == ["a", "b", "c"]
    assert state["outcome"] is None
    assert state["last_seq"] == 0
    assert state["stakeholders"]["a"] == {
        "status": "waiting",
        "digest": None,
        "value": None,
        "rejections": 0,
    }


def test_create_duplicate_session_conflicts(service):
    make_session(service.client)
    with pytest.raises(ServiceError) as err:
        make_session(service.client)
    assert err.value.status == 409


@pytest.mark.parametrize(
    "body",
    [
        {"session_id": "../escape", "modulus": 10, "roster": ["a"]},
        {"session_id": "", "modulus": 10, "roster": ["a"]},
        {"session_id": ".hidden", "modulus": 10, "roster": ["a"]},
        {"session_id": "ok", "modulus": "10", "roster": ["a"]},
        {"session_id": "ok", "modulus": 1, "roster": ["a"]},
        {"session_id": "ok", "modulus": 10, "roster": []},
        {"session_id": "ok", "modulus": 10, "roster": ["a", "a"]},
        {"session_id": "ok", "modulus": 10, "roster": "a"},
        {"session_id": "ok", "modulus": 3, "roster": ["a"], "candidates": ["X"]},
    ],
)
def test_create_validation_rejected(service, body):
    with pytest.raises(ServiceError) as err:
        service.client.create_ceremony(body)
    assert err.value.status == 400


def test_unknown_session_is_404(service):
    with pytest.raises(ServiceError) as err:
        service.client.state("nope")
    assert err.value.status == 404


def test_commit_phase_snapshot_shows_digest_but_never_value(service):
    session_id, tokens = make_session(service.client)
    opening, state = commit_stakeholder(
        service.client, session_id, tokens["a"], "a", 17, 1000
    )
    entry = state["stakeholders"]["a"]
    assert entry["status"] == "committed"
    assert len(entry["digest"]) == 64
    assert entry["value"] is None
    # Neither the contribution nor the mask may leak anywhere in the
    # response while commitments are outstanding.
    blob = json.dumps(state)
    assert opening.mask.hex() not in blob
    assert '"value": 17' not in blob

    transcript, _ = service.client.transcript_bytes(session_id)
    assert opening.mask.hex().encode() not in transcript
    assert b'"value"' not in transcript


# ---------------------------------------------------------------------------
# The happy path


def test_full_ceremony_over_http(service):
    values = {"a": 17, "b": 500, "c": 999}
    session_id, tokens = make_session(service.client)
    openings, state = run_full_ceremony(
        service.client, session_id, tokens, values, 1000
    )
    assert state["phase"] == "complete"
    assert state["outcome"] == (17 + 500 + 999) % 1000
    assert state["selected_candidate"] is None
    assert all(
        entry["status"] == "revealed" for entry in state["stakeholders"].values()
    )
    assert state["stakeholders"]["b"]["value"] == 500

    data, corruption = service.client.transcript_bytes(session_id)
    assert corruption is None
    report = verify_transcript(data)
    assert report.all_ok
    assert report.recomputed_outcome == 516
    assert len(data.splitlines()) == 8  # created + 3 commits + 3 reveals + completed


def test_candidate_pool_selection(service):
    pool = [f"juror-{i}" for i in range(4)]
    session_id, tokens = make_session(
        service.client, m=4, roster=("x", "y"), candidates=pool
    )
    _, state = run_full_ceremony(
        service.client, session_id, tokens, {"x": 3, "y": 2}, 4
    )
    assert state["outcome"] == 1
    assert state["selected_candidate"] == "juror-1"


def test_third_commitment_flips_phase(service):
    session_id, tokens = make_session(service.client)
    _, s1 = commit_stakeholder(service.client, session_id, tokens["a"], "a", 1, 1000)
    assert s1["phase"] == "commit"
    _, s2 = commit_stakeholder(service.client, session_id, tokens["b"], "b", 2, 1000)
    assert s2["phase"] == "commit"
    _, s3 = commit_stakeholder(service.client, session_id, tokens["c"], "c", 3, 1000)
    assert s3["phase"] == "reveal"


# ---------------------------------------------------------------------------
# Authentication and authorization


def test_mutations_require_token(service):
    session_id, tokens = make_session(service.client)
    with pytest.raises(ServiceError) as err:
        service.client.submit_commitment(session_id, "", "0" * 64)
    assert err.value.status == 401
    with pytest.raises(ServiceError) as err:
        service.client.submit_commitment(session_id, "f" * 32, "0" * 64)
    assert err.value.status == 401


def test_token_cannot_act_for_another_stakeholder(service):
    session_id, tokens = make_session(service.client)
    with pytest.raises(ServiceError) as err:
        service.client.submit_commitment(
            session_id, tokens["a"], "0" * 64, stakeholder_id="b"
        )
    assert err.value.status == 403


def test_failed_auth_leaves_transcript_unchanged(service):
    session_id, tokens = make_session(service.client)
    before, _ = service.client.transcript_bytes(session_id)
    for attempt in ("", "deadbeef", tokens["a"][:-1] + "0"):
        with pytest.raises(ServiceError):
            service.client.submit_commitment(session_id, attempt, "1" * 64)
    after, _ = service.client.transcript_bytes(session_id)
    assert after == before


def test_reads_need_no_token(service):
    session_id, _ = make_session(service.client)
    assert service.client.state(session_id)["phase"] == "commit"
    data, _ = service.client.transcript_bytes(session_id)
    assert data


# ---------------------------------------------------------------------------
# Protocol errors over HTTP


def test_duplicate_commitment_conflicts(service):
    session_id, tokens = make_session(service.client)
    commit_stakeholder(service.client, session_id, tokens["a"], "a", 1, 1000)
    with pytest.raises(ServiceError) as err:
        service.client.submit_commitment(session_id, tokens["a"], "2" * 64)
    assert err.value.status == 409
    assert err.value.code == "duplicate_commitment"


def test_reveal_before_full_roster_is_phase_violation(service):
    session_id, tokens = make_session(service.client)
    opening, _ = commit_stakeholder(
        service.client, session_id, tokens["a"], "a", 1, 1000
    )
    with pytest.raises(ServiceError) as err:
        service.client.submit_reveal(
            session_id, tokens["a"], opening.value.n, opening.mask.hex()
        )
    assert err.value.status == 409
    assert err.value.code == "phase_violation"


def test_commit_after_reveal_phase_is_phase_violation(service):
    session_id, tokens = make_session(service.client, roster=("a", "b"))
    commit_stakeholder(service.client, session_id, tokens["a"], "a", 1, 1000)
    commit_stakeholder(service.client, session_id, tokens["b"], "b", 2, 1000)
    with pytest.raises(ServiceError) as err:
        service.client.submit_commitment(session_id, tokens["a"], "3" * 64)
    assert err.value.status == 409


def test_malformed_digest_and_value_rejected(service):
    session_id, tokens = make_session(service.client)
    for digest in ("xyz", "AB" * 32, "00" * 31, 1234):
        with pytest.raises(ServiceError) as err:
            service.client._post(
                f"/v1/ceremonies/{session_id}/commitments",
                {"digest": digest},
                token=tokens["a"],
            )
        assert err.value.status == 400
    with pytest.raises(ServiceError) as err:
        service.client._post(
            f"/v1/ceremonies/{session_id}/reveals",
            {"value": -3, "mask": "0" * 64},
            token=tokens["a"],
        )
    assert err.value.status == 400


def test_out_of_range_reveal_value(service):
    session_id, tokens = make_session(service.client, roster=("a", "b"))
    o1, _ = commit_stakeholder(service.client, session_id, tokens["a"], "a", 1, 1000)
    commit_stakeholder(service.client, session_id, tokens["b"], "b", 2, 1000)
    with pytest.raises(ServiceError) as err:
        service.client.submit_reveal(session_id, tokens["a"], 1000, o1.mask.hex())
    assert err.value.status == 400
    assert err.value.code == "out_of_range"


def test_invalid_opening_recorded_and_retryable(service):
    session_id, tokens = make_session(service.client, roster=("a", "b"))
    o1, _ = commit_stakeholder(service.client, session_id, tokens["a"], "a", 7, 1000)
    o2, _ = commit_stakeholder(service.client, session_id, tokens["b"], "b", 8, 1000)

    with pytest.raises(ServiceError) as err:
        service.client.submit_reveal(session_id, tokens["a"], 9, o1.mask.hex())
    assert err.value.status == 422
    assert err.value.code == "invalid_opening"

    state = service.client.state(session_id)
    assert state["stakeholders"]["a"]["rejections"] == 1
    assert state["stakeholders"]["a"]["status"] == "committed"

    # The failed attempt is part of the public record.
    data, _ = service.client.transcript_bytes(session_id)
    assert b"opening_rejected" in data

    # The reveal slot is not consumed: the true opening still lands, and
    # the finished transcript verifies clean.
    service.client.submit_reveal(session_id, tokens["a"], 7, o1.mask.hex())
    final = service.client.submit_reveal(session_id, tokens["b"], 8, o2.mask.hex())
    assert final["phase"] == "complete"
    assert final["outcome"] == 15
    data, _ = service.client.transcript_bytes(session_id)
    assert verify_transcript(data).all_ok


def test_identical_re_reveal_is_idempotent_conflicting_is_rejected(service):
    session_id, tokens = make_session(service.client, roster=("a", "b"))
    o1, _ = commit_stakeholder(service.client, session_id, tokens["a"], "a", 5, 1000)
    commit_stakeholder(service.client, session_id, tokens["b"], "b", 6, 1000)
    service.client.submit_reveal(session_id, tokens["a"], 5, o1.mask.hex())
    again = service.client.submit_reveal(session_id, tokens["a"], 5, o1.mask.hex())
    assert again["stakeholders"]["a"]["status"] == "revealed"

    before, _ = service.client.transcript_bytes(session_id)
    with pytest.raises(ServiceError) as err:
        service.client.submit_reveal(session_id, tokens["a"], 6, o1.mask.hex())
    assert err.value.status == 422
    after, _ = service.client.transcript_bytes(session_id)
    assert after == before  # a conflicting re-reveal is not a new rejection event


# ---------------------------------------------------------------------------
# Abort


def test_abort_flow(service):
    session_id, tokens = make_session(service.client)
    state = service.client.abort(
        session_id, tokens["b"], "officiant called it off", successor_hint="draw-2"
    )
    assert state["phase"] == "aborted"
    assert state["abort_reason"] == "officiant called it off"
    assert state["successor_hint"] == "draw-2"

    with pytest.raises(ServiceError) as err:
        service.client.submit_commitment(session_id, tokens["a"], "1" * 64)
    assert err.value.status == 409
    data, _ = service.client.transcript_bytes(session_id)
    assert verify_transcript(data).all_ok


def test_abort_requires_token_and_reason(service):
    session_id, tokens = make_session(service.client)
    with pytest.raises(ServiceError) as err:
        service.client.abort(session_id, "", "reason")
    assert err.value.status == 401
    with pytest.raises(ServiceError) as err:
        service.client.abort(session_id, tokens["a"], "   ")
    assert err.value.status == 400


def test_completed_ceremony_cannot_be_aborted(service):
    session_id, tokens = make_session(service.client, roster=("a", "b"))
    run_full_ceremony(service.client, session_id, tokens, {"a": 1, "b": 2}, 1000)
    with pytest.raises(ServiceError) as err:
        service.client.abort(session_id, tokens["a"], "undo the draw")
    assert err.value.status == 409


# ---------------------------------------------------------------------------
# Event stream


def test_sse_replays_completed_session(service):
    session_id, tokens = make_session(service.client, roster=("a", "b"))
    run_full_ceremony(service.client, session_id, tokens, {"a": 3, "b": 4}, 1000)
    records = list(service.client.events(session_id))
    assert [r["seq"] for r in records] == list(range(6))
    assert records[0]["event"]["type"] == "ceremony_created"
    assert records[-1]["event"]["type"] == "completed"
    assert records[-1]["event"]["outcome"] == 7


def test_sse_from_seq_resumes_midway(service):
    session_id, tokens = make_session(service.client, roster=("a", "b"))
    run_full_ceremony(service.client, session_id, tokens, {"a": 3, "b": 4}, 1000)
    records = list(service.client.events(session_id, from_seq=4))
    assert [r["seq"] for r in records] == [4, 5]


def test_sse_two_subscribers_see_identical_streams(service):
    session_id, tokens = make_session(service.client, roster=("a", "b"))

    results = [None, None]

    def subscribe(slot):
        mine = ServiceClient(service.base_url)
        results[slot] = [r for r in mine.events(session_id)]

    threads = [
        threading.Thread(target=subscribe, args=(i,), daemon=True) for i in range(2)
    ]
    for t in threads:
        t.start()
    time.sleep(0.2)  # let both subscribers attach before events flow
    run_full_ceremony(service.client, session_id, tokens, {"a": 9, "b": 4}, 1000)
    for t in threads:
        t.join(timeout=20)
        assert not t.is_alive()
    assert results[0] == results[1]
    assert [r["seq"] for r in results[0]] == list(range(6))


def test_sse_matches_transcript_download(service):
    session_id, tokens = make_session(service.client, roster=("a", "b"))
    run_full_ceremony(service.client, session_id, tokens, {"a": 1, "b": 1}, 1000)
    streamed = list(service.client.events(session_id))
    data, _ = service.client.transcript_bytes(session_id)
    downloaded = [json.loads(line) for line in data.splitlines()]
    assert streamed == downloaded


# ---------------------------------------------------------------------------
# Deadlines


def test_expired_commit_deadline_aborts_on_touch(tmp_path):
    live = start_inprocess(tmp_path / "d", commit_window_ms=80)
    try:
        session_id, tokens = make_session(live.client)
        time.sleep(0.2)
        with pytest.raises(ServiceError) as err:
            commit_stakeholder(live.client, session_id, tokens["a"], "a", 1, 1000)
        assert err.value.status == 409
        assert err.value.code == "deadline_expired"
        state = live.client.state(session_id)
        assert state["phase"] == "aborted"
        assert state["abort_reason"] == "commit deadline expired"
        data, _ = live.client.transcript_bytes(session_id)
        assert verify_transcript(data).all_ok
    finally:
        stop_inprocess(live)


def test_expired_reveal_deadline_aborts(tmp_path):
    live = start_inprocess(tmp_path / "d", reveal_window_ms=150)
    try:
        session_id, tokens = make_session(live.client, roster=("a", "b"))
        o1, _ = commit_stakeholder(live.client, session_id, tokens["a"], "a", 1, 1000)
        commit_stakeholder(live.client, session_id, tokens["b"], "b", 2, 1000)
        time.sleep(0.3)
        with pytest.raises(ServiceError) as err:
            live.client.submit_reveal(session_id, tokens["a"], 1, o1.mask.hex())
        assert err.value.code == "deadline_expired"
        assert live.client.state(session_id)["phase"] == "aborted"
    finally:
        stop_inprocess(live)


def test_sweep_aborts_idle_expired_sessions(tmp_path):
    live = start_inprocess(tmp_path / "d", commit_window_ms=60)
    try:
        session_id, _ = make_session(live.client)
        time.sleep(0.15)
        live.registry.sweep()
        # No client touched the session; the sweep alone recorded the abort.
        data, _ = live.client.transcript_bytes(session_id)
        assert b'"aborted"' in data
        assert verify_transcript(data).all_ok
    finally:
        stop_inprocess(live)


# ---------------------------------------------------------------------------
# Durability and quarantine


def test_restart_resumes_mid_commit_phase(tmp_path):
    roster = tuple(f"p{i}" for i in range(5))
    values = {sid: 100 + i for i, sid in enumerate(roster)}
    live = start_inprocess(tmp_path / "d")
    session_id, tokens = make_session(live.client, m=1000, roster=roster)
    openings = {}
    for sid in roster[:3]:
        openings[sid], _ = commit_stakeholder(
            live.client, session_id, tokens[sid], sid, values[sid], 1000
        )
    stop_inprocess(live)

    revived = start_inprocess(tmp_path / "d")
    try:
        state = revived.client.state(session_id)
        assert state["phase"] == "commit"
        statuses = [e["status"] for e in state["stakeholders"].values()]
        assert statuses.count("committed") == 3
        for sid in roster[3:]:
            openings[sid], _ = commit_stakeholder(
                revived.client, session_id, tokens[sid], sid, values[sid], 1000
            )
        final = None
        for sid in roster:
            final = revived.client.submit_reveal(
                session_id, tokens[sid], openings[sid].value.n, openings[sid].mask.hex()
            )
        assert final["phase"] == "complete"
        assert final["outcome"] == sum(values.values()) % 1000
        data, _ = revived.client.transcript_bytes(session_id)
        assert verify_transcript(data).all_ok
    finally:
        stop_inprocess(revived)


def test_restart_completes_interrupted_completion_record(tmp_path):
    # Crash window: every reveal persisted but the completed record is not.
    session = "resume-1"
    values = {"a": 11, "b": 22}
    masks = {sid: Mask(bytes([i] * 32)) for i, sid in enumerate(values)}
    events = [CeremonyCreated(session_id=session, modulus=100, roster=("a", "b"))]
    for sid, n in values.items():
        digest = commit(session, sid, contribution(n, 100), masks[sid])
        events.append(CommitmentSubmitted(sid, digest.data, 0))
    for sid, n in values.items():
        events.append(RevealSubmitted(sid, n, masks[sid].data, 1))
    transcript = transcript_from_events(events)

    directory = tmp_path / "d" / session
    directory.mkdir(parents=True)
    (directory / "transcript.jsonl").write_bytes(transcript.to_bytes())
    (directory / "tokens.json").write_text(
        json.dumps({"session_id": session, "tokens": {"a": "t" * 32, "b": "u" * 32}})
    )

    live = start_inprocess(tmp_path / "d")
    try:
        state = live.client.state(session)
        assert state["phase"] == "complete"
        assert state["outcome"] == 33
        data, _ = live.client.transcript_bytes(session)
        report = verify_transcript(data)
        assert report.all_ok
        assert data.count(b'"completed"') == 1
    finally:
        stop_inprocess(live)


def test_corrupted_transcript_is_quarantined(tmp_path):
    live = start_inprocess(tmp_path / "d")
    session_id, tokens = make_session(live.client, roster=("a", "b"))
    run_full_ceremony(live.client, session_id, tokens, {"a": 1, "b": 2}, 1000)
    clean_session, clean_tokens = make_session(live.client, session_id="clean-1")
    stop_inprocess(live)

    path = os.path.join(str(tmp_path / "d"), session_id, "transcript.jsonl")
    data = bytearray(open(path, "rb").read())
    data[120] ^= 0x01
    open(path, "wb").write(bytes(data))

    revived = start_inprocess(tmp_path / "d")
    try:
        with pytest.raises(ServiceError) as err:
            revived.client.state(session_id)
        assert err.value.status == 409
        assert err.value.code == "quarantined"

        with pytest.raises(ServiceError) as err:
            revived.client.submit_commitment(session_id, tokens["a"], "0" * 64)
        assert err.value.status == 409

        with pytest.raises(ServiceError) as err:
            list(revived.client.events(session_id))
        assert err.value.status == 409

        # Evidence stays fetchable, byte for byte, with a warning header.
        fetched, corruption = revived.client.transcript_bytes(session_id)
        assert fetched == bytes(data)
        assert corruption is not None and "seq" in corruption

        # An unrelated session in the same store is unaffected.
        assert revived.client.state(clean_session)["phase"] == "commit"
        commit_stakeholder(
            revived.client, clean_session, clean_tokens["a"], "a", 5, 1000
        )
    finally:
        stop_inprocess(revived)


def test_torn_final_line_is_quarantined(tmp_path):
    live = start_inprocess(tmp_path / "d")
    session_id, tokens = make_session(live.client)
    commit_stakeholder(live.client, session_id, tokens["a"], "a", 1, 1000)
    stop_inprocess(live)

    path = os.path.join(str(tmp_path / "d"), session_id, "transcript.jsonl")
    data = open(path, "rb").read()
    open(path, "wb").write(data[:-25])  # cut inside the final record

    revived = start_inprocess(tmp_path / "d")
    try:
        with pytest.raises(ServiceError) as err:
            revived.client.state(session_id)
        assert err.value.code == "quarantined"
    finally:
        stop_inprocess(revived)


def test_missing_token_store_is_quarantined(tmp_path):
    live = start_inprocess(tmp_path / "d")
    session_id, _ = make_session(live.client)
    stop_inprocess(live)
    os.unlink(os.path.join(str(tmp_path / "d"), session_id, "tokens.json"))

    revived = start_inprocess(tmp_path / "d")
    try:
        with pytest.raises(ServiceError) as err:
            revived.client.state(session_id)
        assert err.value.code == "quarantined"
    finally:
        stop_inprocess(revived)


def test_subprocess_server_survives_sigkill(tmp_path):
    """Kill -9 between acknowledged requests, restart on the same store."""
    server = spawn_server(tmp_path / "data", tmp_path / "server1.log")
    values = {"a": 10, "b": 20, "c": 30}
    try:
        client = ServiceClient(server.base_url)
        session_id, tokens = make_session(client, m=100, roster=tuple(values))
        openings = {}
        openings["a"], _ = commit_stakeholder(
            client, session_id, tokens["a"], "a", 10, 100
        )
        openings["b"], _ = commit_stakeholder(
            client, session_id, tokens["b"], "b", 20, 100
        )
    finally:
        server.kill()

    revived = spawn_server(tmp_path / "data", tmp_path / "server2.log")
    try:
        client = ServiceClient(revived.base_url)
        state = client.state(session_id)
        assert state["phase"] == "commit"
        assert state["stakeholders"]["a"]["status"] == "committed"
        assert state["stakeholders"]["c"]["status"] == "waiting"
        openings["c"], _ = commit_stakeholder(
            client, session_id, tokens["c"], "c", 30, 100
        )
        final = None
        for sid, opening in openings.items():
            final = client.submit_reveal(
                session_id, tokens[sid], opening.value.n, opening.mask.hex()
            )
        assert final["phase"] == "complete"
        assert final["outcome"] == 60 % 100
        data, _ = client.transcript_bytes(session_id)
        assert verify_transcript(data).all_ok
    finally:
        revived.stop()


# ---------------------------------------------------------------------------
# Concurrency


def test_concurrent_commitments_all_land_once(service):
    roster = tuple(f"p{i}" for i in range(8))
    session_id, tokens = make_session(service.client, m=100, roster=roster)
    errors = []

    def do_commit(sid):
        try:
            mine = ServiceClient(service.base_url)
            digest = commit(session_id, sid, contribution(1, 100), new_mask())
            mine.submit_commitment(session_id, tokens[sid], digest.hex())
        except Exception as exc:  # collected, not raised in-thread
            errors.append((sid, exc))

    threads = [threading.Thread(target=do_commit, args=(sid,)) for sid in roster]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=20)
    assert errors == []

    state = service.client.state(session_id)
    assert state["phase"] == "reveal"
    data, _ = service.client.transcript_bytes(session_id)
    assert verify_transcript(data).all_ok
    assert data.count(b"commitment_submitted") == 8


def test_racing_duplicate_commitments_single_winner(service):
    session_id, tokens = make_session(service.client, roster=("a", "b"))
    outcomes = []

    def do_commit(i):
        mine = ServiceClient(service.base_url)
        digest = commit(session_id, "a", contribution(i, 1000), new_mask())
        try:
            mine.submit_commitment(session_id, tokens["a"], digest.hex())
            outcomes.append("ok")
        except ServiceError as exc:
            outcomes.append(exc.code)

    threads = [threading.Thread(target=do_commit, args=(i,)) for i in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout=20)

    assert outcomes.count("ok") == 1
    assert outcomes.count("duplicate_commitment") == 5
    data, _ = service.client.transcript_bytes(session_id)
    assert data.count(b"commitment_submitted") == 1
