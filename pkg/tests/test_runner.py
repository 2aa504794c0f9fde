import json

import httpx
import pytest

from helpers import EXEMPLAR_IDS, REPLIES, fixture_split, write_cassette
from vicoref.core import ConfigError
from vicoref.harness import ModelConfig, RunConfig, TokenBudget, run_evaluation
from vicoref.transform import build_gold_clusters


def replay_cfg(cassette, **kw):
    return RunConfig(model=ModelConfig(model="fixture", mode="replay", cassette=cassette), exemplar_ids=EXEMPLAR_IDS, **kw)


def gold_replies(docs):
    return {d.doc_id: build_gold_clusters(d).serialize() for d in docs}


def test_perfect_replies_score_one(tmp_path):
    exemplars, evaluation = fixture_split()
    write_cassette(tmp_path / "c.jsonl", gold_replies(evaluation))
    run = run_evaluation(evaluation, exemplars, replay_cfg(tmp_path / "c.jsonl"))
    assert run.report.consistency_rate == 1.0
    head = run.report.headline()
    # d1 and d5 are single-entity pairs, so MUC has links to score in every document
    assert head == {"conll": 1.0, "muc": 1.0, "b_cubed": 1.0, "ceaf": 1.0}
    assert [e.doc_id for e in run.exchanges] == sorted(d.doc_id for d in evaluation)
    assert all(e.attempt_count == 1 and e.latency_s == 0.25 for e in run.exchanges)


def test_noisy_replies(tmp_path):
    exemplars, evaluation = fixture_split()
    write_cassette(tmp_path / "c.jsonl", REPLIES)
    run = run_evaluation(evaluation, exemplars, replay_cfg(tmp_path / "c.jsonl"))
    by_id = {r.doc_id: r for r in run.report.records}
    assert by_id["d4"].consistency == "RECOVERED"
    assert by_id["d5"].consistency == "UNPARSEABLE"
    assert {"unparseable", "singleton_fallback"} <= set(by_id["d5"].flags)
    assert by_id["d5"].predicted.to_json() == [[1], [2]]
    assert run.report.failed_documents == []


def test_exclude_policy_drops_unparseable(tmp_path):
    exemplars, evaluation = fixture_split()
    write_cassette(tmp_path / "c.jsonl", REPLIES)
    run = run_evaluation(evaluation, exemplars, replay_cfg(tmp_path / "c.jsonl", unparseable="exclude"))
    assert run.report.excluded_documents == ["d5"]
    assert run.report.corpus.n_documents == 4


def test_missing_replies_are_flagged_not_fatal(tmp_path):
    exemplars, evaluation = fixture_split()
    write_cassette(tmp_path / "c.jsonl", {"d1": REPLIES["d1"]})
    run = run_evaluation(evaluation, exemplars, replay_cfg(tmp_path / "c.jsonl"))
    assert run.report.failed_documents == ["d2", "d3", "d4", "d5"]
    failed = [e for e in run.exchanges if e.failed]
    assert all(e.error.startswith("CassetteMiss") for e in failed)


def test_budget_overrun_is_flagged(tmp_path):
    exemplars, evaluation = fixture_split()
    write_cassette(tmp_path / "c.jsonl", {})
    run = run_evaluation(evaluation, exemplars, replay_cfg(tmp_path / "c.jsonl", budget=TokenBudget(50)))
    assert all(e.error.startswith("budget_exceeded") for e in run.exchanges)
    assert run.report.unparseable_rate == 1.0


def test_exemplar_overlap_is_rejected(tmp_path):
    exemplars, evaluation = fixture_split()
    with pytest.raises(ConfigError):
        run_evaluation(evaluation + exemplars[:1], exemplars, replay_cfg(tmp_path / "c.jsonl"))
    with pytest.raises(ConfigError):
        run_evaluation(evaluation, [], replay_cfg(tmp_path / "c.jsonl"))


def test_live_run_through_mock_transport(monkeypatch):
    monkeypatch.setenv("TEST_API_KEY", "k")
    exemplars, evaluation = fixture_split()

    def handler(request):
        return httpx.Response(200, json={"choices": [{"message": {"content": "[]"}}]})

    cfg = RunConfig(
        model=ModelConfig(model="m", base_url="http://test", api_key_env="TEST_API_KEY"),
        exemplar_ids=EXEMPLAR_IDS,
        concurrency=3,
    )
    run = run_evaluation(evaluation, exemplars, cfg, transport=httpx.MockTransport(handler))
    assert run.report.consistency_rate == 1.0
    assert all(r.predicted.clusters == tuple((i,) for i in range(1, r.gold.n_mentions + 1)) for r in run.report.records)


def test_report_is_deterministic(tmp_path):
    exemplars, evaluation = fixture_split()
    write_cassette(tmp_path / "c.jsonl", REPLIES)
    outputs = {
        run_evaluation(evaluation, exemplars, replay_cfg(tmp_path / "c.jsonl", concurrency=c)).report.to_json()
        for c in (1, 4)
    }
    assert len(outputs) == 1
    json.loads(outputs.pop())
