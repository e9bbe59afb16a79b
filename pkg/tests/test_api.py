import json
import shutil
import time
from pathlib import Path

import pytest
from fastapi.testclient import TestClient

from solvertune.api import create_app
from solvertune.orchestrator import create_experiment, run_experiment, start_experiment

from .gen_fixtures import normalize

FIXTURES = Path(__file__).parent / "fixtures"
GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture()
def journal_dir(tmp_path):
    for path in FIXTURES.iterdir():
        shutil.copy(path, tmp_path / path.name)
    return tmp_path


@pytest.fixture()
def client(journal_dir):
    return TestClient(create_app(journal_dir))


def golden(name):
    return json.loads((GOLDEN / name).read_text())


# -- golden comparisons ----------------------------------------------------------------

@pytest.mark.parametrize("name,url", [
    ("experiments.json", "/api/experiments"),
    ("experiment_finished.json", "/api/experiments/fixture-finished"),
    ("trials_page1.json", "/api/experiments/fixture-finished/trials?page=1&per_page=10"),
    ("trials_page3.json", "/api/experiments/fixture-finished/trials?page=3&per_page=10"),
    ("best.json", "/api/experiments/fixture-finished/best"),
    ("series.json", "/api/experiments/fixture-finished/series"),
])
def test_endpoint_matches_golden(client, name, url):
    response = client.get(url)
    assert response.status_code == 200
    assert normalize(response.json()) == golden(name)


def test_experiment_listing_contains_all_fixtures(client):
    body = client.get("/api/experiments").json()
    assert sorted(e["id"] for e in body) == [
        "fixture-created", "fixture-finished", "fixture-running"]
    statuses = {e["id"]: e["status"] for e in body}
    assert statuses["fixture-finished"] == "finished"
    assert statuses["fixture-running"] == "running"
    assert statuses["fixture-created"] == "created"


# -- status codes ------------------------------------------------------------------------

def test_unknown_experiment_is_404(client):
    assert client.get("/api/experiments/ghost").status_code == 404
    assert client.get("/api/experiments/ghost/trials").status_code == 404
    assert client.get("/api/experiments/ghost/best").status_code == 404
    assert client.get("/api/experiments/ghost/series").status_code == 404
    assert client.post("/api/experiments/ghost/stop").status_code == 404


def test_best_404_when_no_successful_trial(client):
    assert client.get("/api/experiments/fixture-created/best").status_code == 404


def test_stop_codes_by_state(client, journal_dir):
    # finished -> 409
    assert client.post("/api/experiments/fixture-finished/stop").status_code == 409
    # created (never started) -> 409
    assert client.post("/api/experiments/fixture-created/stop").status_code == 409
    # running -> 200 and the stop sentinel appears
    response = client.post("/api/experiments/fixture-running/stop")
    assert response.status_code == 200
    assert (journal_dir / "fixture-running.stop").exists()


def test_read_endpoints_are_idempotent(client):
    first = client.get("/api/experiments/fixture-finished/trials").json()
    second = client.get("/api/experiments/fixture-finished/trials").json()
    assert first == second


# -- pagination --------------------------------------------------------------------------

def test_pagination_union_covers_all_trials_without_duplicates(client):
    seen = []
    page = 1
    while True:
        body = client.get(
            f"/api/experiments/fixture-finished/trials?page={page}&per_page=7").json()
        if not body["trials"]:
            break
        seen.extend(t["trial_id"] for t in body["trials"])
        page += 1
    assert sorted(seen) == list(range(24))
    assert len(seen) == len(set(seen))


def test_pagination_defaults(client):
    body = client.get("/api/experiments/fixture-finished/trials").json()
    assert body["per_page"] == 100 and body["page"] == 1
    assert body["total"] == 24


# -- invariants --------------------------------------------------------------------------

def test_series_monotone_non_increasing(client):
    series = client.get("/api/experiments/fixture-finished/series").json()["series"]
    values = [v for _, v in series]
    assert values and all(a >= b for a, b in zip(values, values[1:]))


def test_live_responses_equal_journal_responses_at_finish(tmp_path):
    doc = {
        "target": {"kind": "function", "fn": "sphere", "dim": 2},
        "tuner": {"kind": "ljade", "pop_size": 8},
        "max_trials": 32,
        "concurrency": 4,
        "seed": 5,
    }
    exp = create_experiment(doc, tmp_path, experiment_id="live")
    exp, coordinator = run_experiment(exp)
    live_client = TestClient(create_app(tmp_path, live={"live": coordinator}))
    journal_client = TestClient(create_app(tmp_path))
    for url in ("/api/experiments/live", "/api/experiments/live/best",
                "/api/experiments/live/trials", "/api/experiments/live/series"):
        assert live_client.get(url).json() == journal_client.get(url).json()


def test_stop_through_api_stops_live_run(tmp_path):
    doc = {
        "target": {"kind": "function", "fn": "rastrigin", "dim": 6},
        "tuner": {"kind": "random", "pop_size": 50},
        "max_trials": 100_000,
        "concurrency": 2,
        "seed": 8,
    }
    exp = create_experiment(doc, tmp_path, experiment_id="longrun")
    coordinator = start_experiment(exp)
    client = TestClient(create_app(tmp_path, live={"longrun": coordinator}))
    deadline = time.time() + 10
    while time.time() < deadline and coordinator.snapshot()["trials"]["done"] < 50:
        time.sleep(0.02)
    assert client.post("/api/experiments/longrun/stop").status_code == 200
    coordinator.thread.join(timeout=30)
    assert exp.status == "finished" and exp.reason == "stopped"
    # a second stop now races the finished state: must be 409
    assert client.post("/api/experiments/longrun/stop").status_code == 409
