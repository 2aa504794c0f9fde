import json
import random

import httpx
import pytest

from vicoref.core import ConfigError
from vicoref.harness import Cassette, CassetteMiss, ModelConfig, RetryPolicy, TransportError, complete
from vicoref.harness.client import prompt_digest

OK = {"choices": [{"message": {"content": "[(1, 2)]"}}]}


@pytest.fixture(autouse=True)
def api_key(monkeypatch):
    monkeypatch.setenv("TEST_API_KEY", "secret")


def scripted(*responses):
    """Transport replaying the given (status, body) pairs, then 200 OK forever."""
    calls = []
    queue = list(responses)

    def handler(request):
        calls.append(json.loads(request.content))
        status, body, headers = queue.pop(0) if queue else (200, OK, {})
        return httpx.Response(status, json=body, headers=headers)

    return httpx.MockTransport(handler), calls


def cfg(**kw):
    kw.setdefault("retry", RetryPolicy(max_attempts=3, base_delay=0.01))
    return ModelConfig(model="m", base_url="http://test", api_key_env="TEST_API_KEY", **kw)


def test_retries_transient_errors_then_succeeds():
    transport, calls = scripted((503, {}, {}), (503, {}, {}))
    sleeps = []
    out = complete("p", cfg(), transport=transport, sleep=sleeps.append, rng=random.Random(0))
    assert (out.text, out.attempts, out.replayed) == ("[(1, 2)]", 3, False)
    assert len(calls) == 3 and len(sleeps) == 2
    assert calls[0]["temperature"] == 0.0 and calls[0]["messages"][0]["content"] == "p"


def test_gives_up_after_max_attempts():
    transport, calls = scripted(*[(500, {}, {})] * 5)
    with pytest.raises(TransportError) as err:
        complete("p", cfg(), transport=transport, sleep=lambda s: None)
    assert err.value.attempts == 3 and len(calls) == 3


def test_rate_limit_honors_retry_after():
    transport, _ = scripted((429, {}, {"retry-after": "7"}))
    sleeps = []
    out = complete("p", cfg(), transport=transport, sleep=sleeps.append, rng=random.Random(0))
    assert out.attempts == 2
    assert sleeps == [pytest.approx(7.0)]


def test_client_errors_are_not_retried():
    transport, calls = scripted((400, {"error": "bad"}, {}))
    with pytest.raises(TransportError) as err:
        complete("p", cfg(), transport=transport, sleep=lambda s: None)
    assert err.value.attempts == 1 and len(calls) == 1


def test_connection_errors_are_retried():
    n = {"calls": 0}

    def handler(request):
        n["calls"] += 1
        if n["calls"] == 1:
            raise httpx.ConnectError("refused")
        return httpx.Response(200, json=OK)

    out = complete("p", cfg(), transport=httpx.MockTransport(handler), sleep=lambda s: None)
    assert out.attempts == 2


def test_backoff_grows_and_is_capped():
    policy = RetryPolicy(base_delay=1.0, max_delay=5.0, jitter=0.0)
    rng = random.Random(0)
    assert [policy.delay(a, rng) for a in (1, 2, 3, 4)] == [1.0, 2.0, 4.0, 5.0]
    jittered = RetryPolicy(base_delay=1.0, jitter=0.5)
    assert all(0.5 <= jittered.delay(1, rng) <= 1.0 for _ in range(100))


def test_missing_api_key(monkeypatch):
    monkeypatch.delenv("TEST_API_KEY")
    with pytest.raises(ConfigError):
        complete("p", cfg(), transport=scripted()[0])


def test_record_then_replay(tmp_path):
    path = tmp_path / "c.jsonl"
    transport, calls = scripted((503, {}, {}))
    with Cassette(path) as cassette:
        rec = complete("p", cfg(mode="record", cassette=path), cassette=cassette, transport=transport, sleep=lambda s: None)
    assert rec.attempts == 2
    line = json.loads(path.read_text(encoding="utf-8"))
    assert line["digest"] == prompt_digest("p") and line["attempts"] == 2

    def offline(request):
        raise AssertionError("replay must not touch the network")

    out = complete("p", cfg(mode="replay", cassette=path), transport=httpx.MockTransport(offline))
    assert (out.text, out.attempts, out.replayed) == (rec.text, 2, True)
    assert out.latency_s == line["latency_s"]


def test_replay_miss(tmp_path):
    path = tmp_path / "c.jsonl"
    Cassette(path).append("known", "[]")
    with pytest.raises(CassetteMiss):
        complete("unknown", cfg(mode="replay", cassette=path))


def test_cassette_latest_record_wins(tmp_path):
    path = tmp_path / "c.jsonl"
    c = Cassette(path)
    c.append("p", "first")
    c.append("p", "second")
    assert Cassette(path).lookup("p")["response"] == "second"
    assert len(Cassette(path)) == 1


def test_bad_cassette_line(tmp_path):
    path = tmp_path / "c.jsonl"
    path.write_text("not json\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        Cassette(path)


@pytest.mark.parametrize("kw", [{"mode": "bogus"}, {"mode": "replay"}, {"retry": RetryPolicy(max_attempts=0)}])
def test_model_config_validation(kw):
    with pytest.raises(ConfigError):
        cfg(**kw)
