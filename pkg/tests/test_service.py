"""Label-service tests: session lifecycle, idempotency, HTTP surface."""

import functools

import numpy as np
import pytest
from fastapi.testclient import TestClient

from blocksky.datamodel import RecordPair
from blocksky.functions import exact_match, predicate_universe
from blocksky.harness import run_algorithm
from blocksky.learner import SkylineResult, dominates
from blocksky.metrics import build_index
from blocksky.oracle import GroundTruthOracle
from blocksky.sampling import MATCH, NONMATCH
from blocksky.service import (
    BadConfigError,
    LabelConflictError,
    LabelSession,
    SessionConfig,
    SessionConflictError,
    SessionManager,
    StaleLabelError,
    UnknownRequestError,
    UnknownSessionError,
    create_app,
)
from tests.synth import AttributeProfile, clustered_dataset


@functools.lru_cache(maxsize=None)
def service_fixture():
    rng = np.random.default_rng(23)
    profiles = [AttributeProfile("name", 0.95, 30),
                AttributeProfile("city", 0.85, 10),
                AttributeProfile("code", 0.4, 5)]
    ds, truth = clustered_dataset(rng, n_clusters=12, cluster_size=3,
                                  profiles=profiles, n_singletons=4)
    universe = predicate_universe(ds.schema, (exact_match(),))
    return build_index(ds, universe), truth


def answer_for(truth, request):
    pair = RecordPair(request["left"]["id"], request["right"]["id"])
    return MATCH if pair in truth else NONMATCH


def drive(session, truth, max_steps=5000):
    """Answer every request from ground truth until the session settles."""
    for _ in range(max_steps):
        request = session.next_request(timeout=5.0)
        if request is None:
            snap = session.snapshot()
            if snap["status"] in ("done", "aborted"):
                return snap
            continue
        session.submit_label(request["id"], answer_for(truth, request))
    raise AssertionError("session did not settle")


def expected_result_payload(index, truth, config):
    oracle = GroundTruthOracle(truth, config.budget)
    result = run_algorithm(index, oracle, algorithm=config.algorithm,
                           seed=config.seed, epsilon=config.epsilon,
                           delta=config.delta, l=config.l, k=config.k,
                           sampler=config.sampler)
    points = result.points if isinstance(result, SkylineResult) \
        else (result.point,)
    return {"points": [{"scheme": p.scheme.text, "pc_empirical": p.pc,
                        "pq_empirical": p.pq} for p in points],
            "labels_used": result.labels_used,
            "trace": result.trace}


# --- configuration --------------------------------------------------------


@pytest.mark.parametrize("payload", [
    {"budget": 100},
    {"algorithm": "pro_sky"},
    {"algorithm": "gradient", "budget": 100},
    {"algorithm": "pro_sky", "budget": -1, "l": 2},
    {"algorithm": "pro_sky", "budget": 100},
    {"algorithm": "asl", "budget": 100},
    {"algorithm": "naive_sky", "budget": 100},
    {"algorithm": "pro_sky", "budget": 100, "l": 2, "sampler": "random"},
    {"algorithm": "pro_sky", "budget": 100, "l": 2, "nonsense": 1},
    {"algorithm": "asl", "budget": 100, "epsilon": 0.5, "sampler": "best"},
])
def test_config_rejects_malformed(payload):
    with pytest.raises(BadConfigError):
        SessionConfig.from_payload(payload)


def test_config_accepts_minimal():
    config = SessionConfig.from_payload(
        {"algorithm": "pro_sky", "budget": 100, "l": 2})
    assert config.seed == 1
    assert config.sampler == "active"


# --- interactive equals batch ----------------------------------------------


@pytest.mark.parametrize("config", [
    SessionConfig(algorithm="pro_sky", budget=120, seed=4, l=2),
    SessionConfig(algorithm="asl", budget=80, seed=2, epsilon=0.5, k=10),
    SessionConfig(algorithm="active_sky", budget=120, seed=3, delta=0.25),
])
def test_interactive_session_matches_batch_run(config):
    index, truth = service_fixture()
    manager = SessionManager(index)
    session = manager.start_session(config)
    snap = drive(session, truth)
    assert snap["status"] == "done"
    assert snap["error"] is None
    assert snap["result"] == expected_result_payload(index, truth, config)
    assert snap["labels_used"] == snap["result"]["labels_used"]


def test_zero_budget_completes_immediately_without_result():
    index, _ = service_fixture()
    manager = SessionManager(index)
    session = manager.start_session(
        SessionConfig(algorithm="pro_sky", budget=0, l=2))
    session.wait_done(timeout=10.0)
    snap = session.snapshot()
    assert snap["status"] == "done"
    assert snap["result"] is None
    assert snap["error"]
    assert snap["points"] == []
    assert snap["labels_used"] == 0


# --- request/label protocol -------------------------------------------------


def fresh_session(algorithm="pro_sky", budget=120, **kwargs):
    index, truth = service_fixture()
    manager = SessionManager(index)
    kwargs.setdefault("l", 2)
    session = manager.start_session(
        SessionConfig(algorithm=algorithm, budget=budget, **kwargs))
    return manager, session, truth


def test_repeated_polls_return_same_request():
    _, session, truth = fresh_session()
    try:
        first = session.next_request(timeout=5.0)
        second = session.next_request(timeout=0.0)
        assert first is not None
        assert first["id"] == second["id"]
        assert first["left"]["values"].keys() == {"name", "city", "code"}
        snap = session.snapshot()
        assert snap["status"] == "awaiting_label"
        assert snap["pending"]["id"] == first["id"]
    finally:
        session.abort()


def test_duplicate_label_is_acknowledged_not_recounted():
    _, session, truth = fresh_session()
    try:
        request = session.next_request(timeout=5.0)
        label = answer_for(truth, request)
        assert session.submit_label(request["id"], label) == "accepted"
        session.next_request(timeout=5.0)  # worker consumed the answer
        used_before = session.snapshot()["labels_used"]
        assert session.submit_label(request["id"], label) == "duplicate"
        assert session.snapshot()["labels_used"] == used_before
    finally:
        session.abort()


def test_conflicting_duplicate_is_rejected():
    _, session, truth = fresh_session()
    try:
        request = session.next_request(timeout=5.0)
        label = answer_for(truth, request)
        session.submit_label(request["id"], label)
        session.next_request(timeout=5.0)
        other = NONMATCH if label == MATCH else MATCH
        with pytest.raises(LabelConflictError):
            session.submit_label(request["id"], other)
    finally:
        session.abort()


def test_unknown_request_and_bad_label_value():
    _, session, truth = fresh_session()
    try:
        request = session.next_request(timeout=5.0)
        with pytest.raises(UnknownRequestError):
            session.submit_label("q999", MATCH)
        with pytest.raises(BadConfigError):
            session.submit_label(request["id"], "maybe")
    finally:
        session.abort()


def test_labels_after_abort_are_stale():
    _, session, truth = fresh_session()
    request = session.next_request(timeout=5.0)
    session.abort()
    assert session.snapshot()["status"] == "aborted"
    with pytest.raises(StaleLabelError):
        session.submit_label(request["id"], MATCH)
    session.abort()  # idempotent


def test_abort_after_done_conflicts():
    index, truth = service_fixture()
    manager = SessionManager(index)
    session = manager.start_session(
        SessionConfig(algorithm="pro_sky", budget=0, l=2))
    session.wait_done(timeout=10.0)
    with pytest.raises(SessionConflictError):
        session.abort()


def test_single_active_session_per_manager():
    manager, session, truth = fresh_session()
    with pytest.raises(SessionConflictError):
        manager.start_session(SessionConfig(algorithm="pro_sky", budget=50,
                                            l=2))
    session.abort()
    replacement = manager.start_session(
        SessionConfig(algorithm="pro_sky", budget=0, l=2))
    assert replacement.id != session.id
    replacement.wait_done(timeout=10.0)
    with pytest.raises(UnknownSessionError):
        manager.get("s99")


def test_snapshot_points_never_dominate_each_other():
    index, truth = service_fixture()
    manager = SessionManager(index)
    session = manager.start_session(
        SessionConfig(algorithm="pro_sky", budget=120, seed=6, l=2))
    first_points: list[dict] | None = None
    for _ in range(5000):
        request = session.next_request(timeout=5.0)
        snap = session.snapshot()
        points = snap["points"]
        if points and first_points is None:
            first_points = points
        for i, a in enumerate(points):
            for b in points[i + 1:]:
                better = (a["pc"] >= b["pc"] and a["pq"] >= b["pq"]
                          and (a["pc"] > b["pc"] or a["pq"] > b["pq"]))
                worse = (b["pc"] >= a["pc"] and b["pq"] >= a["pq"]
                         and (b["pc"] > a["pc"] or b["pq"] > a["pq"]))
                assert not better and not worse
        if request is None:
            if snap["status"] == "done":
                break
            continue
        session.submit_label(request["id"], answer_for(truth, request))
    else:
        raise AssertionError("session did not settle")
    # the first emission comes from the singles-only pool
    assert first_points is not None
    universe_size = len(index.universe)
    assert len(first_points) <= universe_size
    for point in first_points:
        assert "∧" not in point["scheme"] and "∨" not in point["scheme"]


# --- HTTP surface -----------------------------------------------------------


def start_body(budget=120, seed=4):
    return {"algorithm": "pro_sky", "budget": budget, "seed": seed, "l": 2}


def test_http_interactive_run_matches_batch():
    index, truth = service_fixture()
    client = TestClient(create_app(index))
    created = client.post("/sessions", json=start_body())
    assert created.status_code == 201
    snap = created.json()
    sid = snap["session"]
    assert snap["status"] in ("awaiting_label", "running")
    for _ in range(5000):
        got = client.get(f"/sessions/{sid}/request",
                         params={"timeout_ms": 2000})
        request = got.json()["request"]
        if request is None:
            snap = client.get(f"/sessions/{sid}").json()
            if snap["status"] == "done":
                break
            continue
        posted = client.post(f"/sessions/{sid}/labels",
                             json={"request_id": request["id"],
                                   "label": answer_for(truth, request)})
        assert posted.status_code == 200
        assert posted.json()["status"] == "accepted"
    else:
        raise AssertionError("session did not settle")
    config = SessionConfig.from_payload(start_body())
    assert snap["result"] == expected_result_payload(index, truth, config)


def test_http_error_paths():
    index, truth = service_fixture()
    client = TestClient(create_app(index))
    assert client.get("/sessions/nope").status_code == 404
    assert client.post("/sessions", json={"algorithm": "pro_sky",
                                          "budget": 10}).status_code == 422

    created = client.post("/sessions", json=start_body())
    sid = created.json()["session"]
    assert client.post("/sessions", json=start_body()).status_code == 409

    request = client.get(f"/sessions/{sid}/request",
                         params={"timeout_ms": 5000}).json()["request"]
    assert request is not None
    missing = client.post(f"/sessions/{sid}/labels", json={"label": MATCH})
    assert missing.status_code == 422
    bad_value = client.post(f"/sessions/{sid}/labels",
                            json={"request_id": request["id"],
                                  "label": "maybe"})
    assert bad_value.status_code == 422
    unknown = client.post(f"/sessions/{sid}/labels",
                          json={"request_id": "q999", "label": MATCH})
    assert unknown.status_code == 404

    label = answer_for(truth, request)
    accepted = client.post(f"/sessions/{sid}/labels",
                           json={"request_id": request["id"], "label": label})
    assert accepted.json()["status"] == "accepted"
    client.get(f"/sessions/{sid}/request", params={"timeout_ms": 5000})
    conflict = client.post(f"/sessions/{sid}/labels",
                           json={"request_id": request["id"],
                                 "label": MATCH if label == NONMATCH
                                 else NONMATCH})
    assert conflict.status_code == 409

    aborted = client.post(f"/sessions/{sid}/abort")
    assert aborted.status_code == 200
    assert aborted.json()["status"] == "aborted"
    stale = client.post(f"/sessions/{sid}/labels",
                        json={"request_id": request["id"], "label": label})
    assert stale.status_code == 409


def test_http_zero_budget_session_is_done_on_create():
    index, _ = service_fixture()
    client = TestClient(create_app(index))
    created = client.post("/sessions", json=start_body(budget=0))
    assert created.status_code == 201
    snap = created.json()
    assert snap["status"] == "done"
    assert snap["result"] is None
    got = client.get(f"/sessions/{snap['session']}/request",
                     params={"timeout_ms": 50})
    assert got.json()["request"] is None
