import json

import pytest
import requests

from vdkit.config.pipeline import EndpointConfig
from vdkit.exceptions import AuthError, EndpointError
from vdkit.schemas.evaluation import Verdict
from vdkit.schemas.function import Label
from vdkit.services.inference import ChatEndpointClient, InferenceService, parse_verdict
from vdkit.services.prompt import PromptService

from tests.conftest import ScriptedSession, chat, make_record, response


def client_for(session, **config) -> ChatEndpointClient:
    sleeps = []
    endpoint = EndpointConfig(url="http://endpoint.test/v1/chat/completions", model="demo", **config)
    client = ChatEndpointClient(endpoint, api_key="secret", session=session, sleep=sleeps.append)
    client.sleeps = sleeps
    return client


def bundle(rid="r1", code="int f(int x) { return x; }", label=Label.VULNERABLE):
    return PromptService.build_prompt(make_record(rid, code, label))


@pytest.mark.parametrize("reply,verdict", [
    ("Yes", Verdict.VULNERABLE),
    ("yes.", Verdict.VULNERABLE),
    ("No, it is safe", Verdict.NON_VULNERABLE),
    ("  NO", Verdict.NON_VULNERABLE),
    ("The answer: yes", Verdict.VULNERABLE),
    ("Yesterday", Verdict.ABSTAIN),
    ("I cannot tell", Verdict.ABSTAIN),
    ("", Verdict.ABSTAIN),
    (None, Verdict.ABSTAIN),
])
def test_parse_verdict(reply, verdict):
    assert parse_verdict(reply) is verdict


def test_request_carries_decoding_settings():
    session = ScriptedSession([chat("Yes")])
    client = client_for(session)
    record = InferenceService.infer_one(client, bundle())
    call = session.calls[0]
    assert call["json"]["top_p"] == 0.9
    assert call["json"]["temperature"] == 0
    assert call["json"]["max_tokens"] == 10
    assert call["json"]["model"] == "demo"
    assert call["json"]["messages"][0]["role"] == "system"
    assert call["headers"]["Authorization"] == "Bearer secret"
    assert record.verdict is Verdict.VULNERABLE
    assert record.attempts == 1
    assert record.request == call["json"]


def test_transient_errors_are_retried_with_backoff():
    session = ScriptedSession([response(503, {}), requests.ConnectionError("reset"), response(429, {}), chat("No")])
    client = client_for(session, backoff_base=0.5)
    reply, attempts = client.complete([{"role": "user", "content": "x"}])
    assert reply == "No"
    assert attempts == 4
    assert client.sleeps == [0.5, 1.0, 2.0]


def test_retries_exhausted():
    session = ScriptedSession([response(500, {})] * 4)
    client = client_for(session, max_retries=3)
    with pytest.raises(EndpointError):
        client.complete([{"role": "user", "content": "x"}])
    assert len(session.calls) == 4


@pytest.mark.parametrize("status", [401, 403])
def test_auth_errors_are_not_retried(status):
    session = ScriptedSession([response(status, {})])
    with pytest.raises(AuthError):
        client_for(session).complete([{"role": "user", "content": "x"}])
    assert len(session.calls) == 1


def test_client_error_and_malformed_body():
    with pytest.raises(EndpointError):
        client_for(ScriptedSession([response(400, {"error": "bad"})])).complete([])
    with pytest.raises(EndpointError):
        client_for(ScriptedSession([response(200)])).complete([])
    with pytest.raises(EndpointError):
        client_for(ScriptedSession([response(200, {"choices": []})])).complete([])


def test_completion_text_field():
    session = ScriptedSession([response(200, {"choices": [{"text": "No"}]})])
    assert client_for(session).complete([])[0] == "No"


def _by_code(content: str) -> requests.Response:
    if "return 1" in content:
        return chat("Yes")
    if "return 2" in content:
        return chat("No")
    return chat("Maybe")


def test_run_inference_keeps_order_and_logs(tmp_path):
    bundles = [bundle(f"r{i}", f"int f(void) {{ return {i % 3}; }}") for i in range(9)]
    client = client_for(ScriptedSession(responder=_by_code), concurrency=4)
    log = tmp_path / "log.jsonl"
    records = InferenceService.run_inference(bundles, client=client, log_path=log)
    assert [r.record_id for r in records] == [f"r{i}" for i in range(9)]
    assert [r.verdict for r in records[:3]] == [Verdict.ABSTAIN, Verdict.VULNERABLE, Verdict.NON_VULNERABLE]
    # O log segue a ordem de conclusão
    replayed = sorted(InferenceService.replay(log), key=lambda r: int(r.record_id[1:]))
    assert [r.model_dump() for r in replayed] == [r.model_dump() for r in records]


def test_log_appends(tmp_path):
    log = tmp_path / "log.jsonl"
    client = client_for(ScriptedSession(responder=_by_code))
    InferenceService.run_inference([bundle("a")], client=client, log_path=log)
    InferenceService.run_inference([bundle("b")], client=client, log_path=log)
    assert [r.record_id for r in InferenceService.replay(log)] == ["a", "b"]


def test_failures_surface_after_logging_successes(tmp_path):
    def responder(content):
        return response(401, {}) if "return 2" in content else chat("Yes")

    log = tmp_path / "log.jsonl"
    bundles = [bundle("ok", "int f(void) { return 1; }"), bundle("denied", "int f(void) { return 2; }")]
    with pytest.raises(AuthError):
        InferenceService.run_inference(
            bundles, client=client_for(ScriptedSession(responder=responder), concurrency=1), log_path=log
        )
    rows = {row["record_id"]: row for row in map(json.loads, log.read_text().splitlines())}
    assert rows["ok"]["error"] is None
    assert rows["denied"]["error"].startswith("AuthError")
    assert [r.record_id for r in InferenceService.replay(log)] == ["ok"]


def test_failed_requests_are_logged_with_their_request(tmp_path):
    def responder(content):
        return response(500, {}) if "return 2" in content else chat("Yes")

    log = tmp_path / "log.jsonl"
    bundles = [bundle(rid, f"int f(void) {{ return {n}; }}") for rid, n in (("A", 1), ("B", 2), ("C", 1))]
    client = client_for(ScriptedSession(responder=responder), max_retries=0)
    with pytest.raises(EndpointError):
        InferenceService.run_inference(bundles, client=client, log_path=log)

    rows = {row["record_id"]: row for row in map(json.loads, log.read_text().splitlines())}
    assert set(rows) == {"A", "B", "C"}
    assert rows["B"]["error"].startswith("EndpointError")
    assert rows["B"]["verdict"] == "Abstain"
    assert rows["B"]["reply"] is None
    assert rows["B"]["attempts"] == 1
    assert "return 2" in rows["B"]["request"]["messages"][-1]["content"]
    assert rows["A"]["error"] is None and rows["A"]["reply"] == "Yes"
    assert sorted(r.record_id for r in InferenceService.replay(log)) == ["A", "C"]


def test_auth_error_stops_sending(tmp_path):
    session = ScriptedSession(responder=lambda content: response(401, {}))
    log = tmp_path / "log.jsonl"
    bundles = [bundle(f"r{i}") for i in range(5)]
    with pytest.raises(AuthError):
        InferenceService.run_inference(bundles, client=client_for(session, concurrency=1), log_path=log)
    assert len(session.calls) == 1
    (row,) = map(json.loads, log.read_text().splitlines())
    assert row["record_id"] == "r0"
    assert row["error"].startswith("AuthError")


def test_replay_recomputes_verdict(tmp_path):
    log = tmp_path / "log.jsonl"
    row = {"record_id": "x", "verdict": "Abstain", "reply": "Yes, overflow", "label": "Vulnerable"}
    log.write_text(json.dumps(row) + "\n")
    (record,) = InferenceService.replay(log)
    assert record.verdict is Verdict.VULNERABLE
