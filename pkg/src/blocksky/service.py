"""Interactive labelling sessions and their HTTP surface.

A session runs one learner on a worker thread; whenever the learner needs
a label it parks on a condition variable and the pair surfaces as the
session's pending request. Clients poll the request, submit the label,
and the learner resumes. With a ground-truth responder the run is
indistinguishable from a batch run with the same seed and configuration:
the learner code path is identical, only the oracle differs.

At most one session is live per manager. Finished sessions stay readable
until the next one starts.
"""

from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass

from blocksky.datamodel import RecordPair
from blocksky.harness import ALGORITHMS, HarnessError, run_algorithm
from blocksky.learner import LearnError, SchemePoint, SkylineResult
from blocksky.metrics import DatasetIndex
from blocksky.oracle import CallbackOracle, OracleError, SessionAbortedError
from blocksky.sampling import MATCH, NONMATCH


class ServiceError(Exception):
    """Base for session-layer failures; `status` maps to HTTP."""

    status = 500


class BadConfigError(ServiceError):
    status = 422


class SessionConflictError(ServiceError):
    status = 409


class UnknownSessionError(ServiceError):
    status = 404


class UnknownRequestError(ServiceError):
    status = 404


class LabelConflictError(ServiceError):
    """Same request id submitted again with a different label."""

    status = 409


class StaleLabelError(ServiceError):
    """Label arrived after the session finished or was aborted."""

    status = 409


@dataclass(frozen=True)
class SessionConfig:
    """Learner configuration for one interactive session."""

    algorithm: str
    budget: int
    seed: int = 1
    epsilon: float | None = None
    delta: float | None = None
    l: int | None = None
    k: int | None = None
    sampler: str = "active"

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise BadConfigError(f"unknown algorithm {self.algorithm!r}")
        if self.budget < 0:
            raise BadConfigError("budget must be non-negative")
        if self.sampler not in ("active", "random"):
            raise BadConfigError(f"unknown sampler {self.sampler!r}")
        if self.algorithm == "asl" and self.epsilon is None:
            raise BadConfigError("asl needs an epsilon")
        if self.algorithm in ("naive_sky", "active_sky") and self.delta is None:
            raise BadConfigError(f"{self.algorithm} needs a delta")
        if self.algorithm == "pro_sky":
            if self.l is None:
                raise BadConfigError("pro_sky needs a conjunction cap l")
            if self.sampler != "active":
                raise BadConfigError("pro_sky always samples actively")

    @classmethod
    def from_payload(cls, payload: dict) -> "SessionConfig":
        allowed = {"algorithm", "budget", "seed", "epsilon", "delta", "l",
                   "k", "sampler"}
        unknown = set(payload) - allowed
        if unknown:
            raise BadConfigError(f"unknown fields: {sorted(unknown)}")
        if "algorithm" not in payload or "budget" not in payload:
            raise BadConfigError("algorithm and budget are required")
        try:
            return cls(**payload)
        except TypeError as exc:
            raise BadConfigError(str(exc)) from None


@dataclass
class _PendingRequest:
    id: str
    pair: RecordPair
    answer: str | None = None


class LabelSession:
    """One learner run, fed labels through `submit_label`."""

    def __init__(self, session_id: str, index: DatasetIndex,
                 config: SessionConfig):
        self.id = session_id
        self.config = config
        self._index = index
        self._cond = threading.Condition()
        self._pending: _PendingRequest | None = None
        self._answered: dict[str, str] = {}
        self._aborted = False
        self._finished = False
        self._result: SkylineResult | None = None
        self._error: str | None = None
        self._points: tuple[SchemePoint, ...] = ()
        self._seq = itertools.count(1)
        self._oracle = CallbackOracle(self._ask, config.budget)
        self._thread = threading.Thread(target=self._work, daemon=True,
                                        name=f"label-session-{session_id}")

    def start(self) -> None:
        self._thread.start()

    # ---- worker thread ----------------------------------------------

    def _work(self) -> None:
        config = self.config
        try:
            result = run_algorithm(
                self._index, self._oracle, algorithm=config.algorithm,
                seed=config.seed, epsilon=config.epsilon, delta=config.delta,
                l=config.l, k=config.k, sampler=config.sampler,
                progress=self._on_progress)
        except SessionAbortedError:
            with self._cond:
                self._finished = True
                self._cond.notify_all()
            return
        except (LearnError, OracleError, HarnessError) as exc:
            with self._cond:
                self._error = str(exc)
                self._finished = True
                self._cond.notify_all()
            return
        with self._cond:
            self._result = result
            if isinstance(result, SkylineResult):
                self._points = result.points
            else:
                self._points = (result.point,)
            self._finished = True
            self._cond.notify_all()

    def _on_progress(self, points: tuple[SchemePoint, ...]) -> None:
        with self._cond:
            self._points = tuple(points)

    def _ask(self, pair: RecordPair) -> str:
        with self._cond:
            if self._aborted:
                raise SessionAbortedError("session aborted")
            request = _PendingRequest(id=f"q{next(self._seq)}", pair=pair)
            self._pending = request
            self._cond.notify_all()
            self._cond.wait_for(
                lambda: request.answer is not None or self._aborted)
            self._pending = None
            self._cond.notify_all()
            if request.answer is not None:
                self._answered[request.id] = request.answer
            if self._aborted:
                raise SessionAbortedError("session aborted")
            return request.answer

    # ---- client side --------------------------------------------------

    def is_live(self) -> bool:
        with self._cond:
            return not (self._finished or self._aborted)

    def wait_for_activity(self, timeout: float) -> None:
        """Block until the first request appears or the run settles."""
        with self._cond:
            self._cond.wait_for(
                lambda: self._pending is not None or self._finished
                or self._aborted, timeout=timeout)

    def next_request(self, timeout: float = 0.0) -> dict | None:
        """The pending request, waiting up to `timeout` for one to appear.

        Polling again without answering returns the same request id.
        Returns None when the session has no open request (finished,
        aborted, or still computing past the timeout).
        """
        with self._cond:
            self._cond.wait_for(
                lambda: (self._pending is not None
                         and self._pending.answer is None)
                or self._finished or self._aborted,
                timeout=timeout)
            return self._request_payload_locked()

    def _request_payload_locked(self) -> dict | None:
        if self._pending is None or self._pending.answer is not None:
            return None
        pair = self._pending.pair
        dataset = self._index.dataset

        def record_payload(rid: str) -> dict:
            record = dataset.record(rid)
            return {"id": record.id,
                    "values": dict(zip(dataset.schema, record.values))}

        return {"id": self._pending.id,
                "left": record_payload(pair.left),
                "right": record_payload(pair.right)}

    def submit_label(self, request_id: str, label: str) -> str:
        """Answer a request. Returns "accepted" or "duplicate".

        A resubmission with the same label is acknowledged without
        consuming anything; the same id with a different label is a
        conflict. Labels for unknown ids, or arriving after the session
        finished or was aborted, are rejected.
        """
        if label not in (MATCH, NONMATCH):
            raise BadConfigError(
                f"label must be {MATCH!r} or {NONMATCH!r}, got {label!r}")
        with self._cond:
            if self._aborted or self._finished:
                raise StaleLabelError("session is no longer accepting labels")
            if self._pending is not None and request_id == self._pending.id:
                if self._pending.answer is None:
                    self._pending.answer = label
                    self._cond.notify_all()
                    return "accepted"
                if self._pending.answer == label:
                    return "duplicate"
                raise LabelConflictError(
                    f"request {request_id} already answered differently")
            if request_id in self._answered:
                if self._answered[request_id] == label:
                    return "duplicate"
                raise LabelConflictError(
                    f"request {request_id} already answered differently")
            raise UnknownRequestError(f"no such request {request_id!r}")

    def abort(self) -> None:
        """Stop the run. Idempotent for aborted sessions."""
        with self._cond:
            if self._finished and not self._aborted:
                raise SessionConflictError("session already finished")
            self._aborted = True
            self._cond.notify_all()
        self._thread.join(timeout=5.0)

    def wait_done(self, timeout: float = 30.0) -> None:
        with self._cond:
            if not self._cond.wait_for(lambda: self._finished,
                                       timeout=timeout):
                raise TimeoutError("session did not finish in time")

    @property
    def result(self) -> SkylineResult | None:
        with self._cond:
            return self._result

    def snapshot(self) -> dict:
        with self._cond:
            if self._aborted:
                status = "aborted"
            elif self._finished:
                status = "done"
            elif self._pending is not None and self._pending.answer is None:
                status = "awaiting_label"
            else:
                status = "running"
            snap: dict = {
                "session": self.id,
                "status": status,
                "algorithm": self.config.algorithm,
                "seed": self.config.seed,
                "budget": self._oracle.budget,
                "labels_used": self._oracle.used,
                "pending": self._request_payload_locked(),
                "points": [{"scheme": p.scheme.text, "pc": p.pc, "pq": p.pq}
                           for p in self._points],
            }
            if status == "done":
                snap["result"] = self._result_payload_locked()
                snap["error"] = self._error
            return snap

    def _result_payload_locked(self) -> dict | None:
        if self._result is None:
            return None
        result = self._result
        if isinstance(result, SkylineResult):
            points = result.points
        else:
            points = (result.point,)
        return {"points": [{"scheme": p.scheme.text,
                            "pc_empirical": p.pc, "pq_empirical": p.pq}
                           for p in points],
                "labels_used": result.labels_used,
                "trace": result.trace}


class SessionManager:
    """Owns the sessions of one served dataset; at most one live."""

    def __init__(self, index: DatasetIndex):
        self.index = index
        self._sessions: dict[str, LabelSession] = {}
        self._counter = itertools.count(1)
        self._lock = threading.Lock()

    def start_session(self, config: SessionConfig) -> LabelSession:
        with self._lock:
            for session in self._sessions.values():
                if session.is_live():
                    raise SessionConflictError(
                        f"session {session.id} is still active")
            sid = f"s{next(self._counter)}"
            session = LabelSession(sid, self.index, config)
            self._sessions[sid] = session
            session.start()
            return session

    def get(self, session_id: str) -> LabelSession:
        try:
            return self._sessions[session_id]
        except KeyError:
            raise UnknownSessionError(
                f"no such session {session_id!r}") from None

    def abort_all(self) -> None:
        with self._lock:
            sessions = list(self._sessions.values())
        for session in sessions:
            if session.is_live():
                session.abort()


def create_app(index: DatasetIndex):
    """FastAPI app exposing one manager over HTTP.

    Endpoints: POST /sessions, GET /sessions/{id},
    GET /sessions/{id}/request (long poll), POST /sessions/{id}/labels,
    POST /sessions/{id}/abort.
    """
    from fastapi import Body, FastAPI, HTTPException

    app = FastAPI(title="blocking scheme label service")
    manager = SessionManager(index)
    app.state.manager = manager

    def guarded(fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ServiceError as exc:
            raise HTTPException(status_code=exc.status,
                                detail=str(exc)) from None

    @app.post("/sessions", status_code=201)
    def start_session(body: dict = Body(...)) -> dict:
        config = guarded(SessionConfig.from_payload, body)
        session = guarded(manager.start_session, config)
        session.wait_for_activity(timeout=10.0)
        return session.snapshot()

    @app.get("/sessions/{session_id}")
    def get_snapshot(session_id: str) -> dict:
        return guarded(manager.get, session_id).snapshot()

    @app.get("/sessions/{session_id}/request")
    def get_request(session_id: str, timeout_ms: int = 25_000) -> dict:
        session = guarded(manager.get, session_id)
        timeout = min(max(timeout_ms, 0), 60_000) / 1000.0
        return {"request": session.next_request(timeout=timeout)}

    @app.post("/sessions/{session_id}/labels")
    def post_label(session_id: str, body: dict = Body(...)) -> dict:
        session = guarded(manager.get, session_id)
        if "request_id" not in body or "label" not in body:
            raise HTTPException(status_code=422,
                                detail="request_id and label are required")
        status = guarded(session.submit_label, body["request_id"],
                         body["label"])
        return {"status": status}

    @app.post("/sessions/{session_id}/abort")
    def post_abort(session_id: str) -> dict:
        session = guarded(manager.get, session_id)
        guarded(session.abort)
        return session.snapshot()

    return app
