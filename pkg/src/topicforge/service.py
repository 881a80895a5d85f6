"""Labeling-session service: query delivery, label ingestion, retraining,
metrics, and export over HTTP+JSON, persisted as an append-only event log.

Each session lives in its own directory under the data dir:

    <data_dir>/sessions/<session_id>/corpus.jsonl   frozen corpus snapshot
    <data_dir>/sessions/<session_id>/events.jsonl   append-only event log

Events are ``created``, ``labels_submitted`` and ``retrained``; replaying
them over the corpus snapshot reconstructs the exact session state, so a
killed service resumes where it stopped. Within a session all mutations are
serialized by a lock; reads see consistent snapshots. Submissions carry an
idempotency token: a duplicate token returns the original round log without
touching state.
"""

import hashlib
import json
import os
import random
import re
import threading
import uuid
from dataclasses import dataclass
from datetime import datetime, timezone
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import parse_qs, urlparse

from .active import AlRoundLog, RoundAnswers, apply_answers, _retrain, make_state, rank_features, rank_instances, run_round
from .corpus import LABELS, SentenceRecord, load_guidelines
from .errors import SessionError, TopicForgeError
from .nb import NbConfig

DEFAULT_DATA_DIR_ENV = "TOPIC_FORGE_DATA_DIR"


def default_data_dir() -> str:
    return os.environ.get(DEFAULT_DATA_DIR_ENV, os.path.join(os.getcwd(), "topicforge-data"))


@dataclass(frozen=True)
class SessionConfig:
    alpha: float = 1.0
    boost: float = 50.0
    bigrams: bool = True
    em_pass: bool = False
    seed: int = 0  # cold-start sampling seed
    defer_retrain: bool = False

    def nb_config(self) -> NbConfig:
        return NbConfig(alpha=self.alpha, boost=self.boost, bigrams=self.bigrams,
                        em_pass=self.em_pass)

    def to_json_obj(self) -> dict:
        return {
            "alpha": self.alpha,
            "boost": self.boost,
            "bigrams": self.bigrams,
            "em_pass": self.em_pass,
            "seed": self.seed,
            "defer_retrain": self.defer_retrain,
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "SessionConfig":
        known = {f for f in cls.__dataclass_fields__}
        bad = set(obj) - known
        if bad:
            raise SessionError(f"unknown config fields: {sorted(bad)}", code="invalid_config")
        return cls(**obj)


def _canonical_json(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


class Session:
    """One labeling session; mutations serialized, state replayable."""

    def __init__(self, session_id: str, directory: str, config: SessionConfig, state):
        self.session_id = session_id
        self.directory = directory
        self.config = config
        self.state = state
        self.lock = threading.RLock()
        self.guidelines = load_guidelines()
        self._token_logs: dict = {}
        self._stale = False  # set when defer_retrain skips a retrain

    # -- construction ------------------------------------------------------

    @classmethod
    def create(cls, directory: str, records, config: SessionConfig) -> "Session":
        records = list(records)
        if not records:
            raise SessionError("empty corpus", code="empty_corpus")
        session_id = uuid.uuid4().hex
        sdir = os.path.join(directory, session_id)
        os.makedirs(sdir)
        corpus_path = os.path.join(sdir, "corpus.jsonl")
        payload = "".join(rec.to_json() + "\n" for rec in records)
        with open(corpus_path, "w", encoding="utf-8") as fh:
            fh.write(payload)
        digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()

        state = make_state(records, config=config.nb_config(), classes=LABELS)
        session = cls(session_id, sdir, config, state)
        session._append_event(
            {
                "type": "created",
                "session_id": session_id,
                "config": config.to_json_obj(),
                "corpus_file": "corpus.jsonl",
                "corpus_sha256": digest,
                "guideline_version": session.guidelines["version"],
            }
        )
        return session

    @classmethod
    def load(cls, directory: str, session_id: str) -> "Session":
        """Rebuild a session by replaying its event log over the corpus."""
        sdir = os.path.join(directory, session_id)
        events_path = os.path.join(sdir, "events.jsonl")
        if not os.path.exists(events_path):
            raise SessionError(f"unknown session: {session_id}", code="unknown_session")
        events = []
        with open(events_path, "r", encoding="utf-8") as fh:
            for line in fh:
                if line.strip():
                    events.append(json.loads(line))
        if not events or events[0].get("type") != "created":
            raise SessionError(f"corrupt event log for session {session_id}", code="corrupt_log")
        created = events[0]
        config = SessionConfig.from_json_obj(created["config"])

        corpus_path = os.path.join(sdir, created["corpus_file"])
        with open(corpus_path, "r", encoding="utf-8") as fh:
            payload = fh.read()
        digest = hashlib.sha256(payload.encode("utf-8")).hexdigest()
        if digest != created["corpus_sha256"]:
            raise SessionError(
                f"corpus snapshot hash mismatch for session {session_id}", code="corrupt_log"
            )
        records = [
            SentenceRecord.from_json_obj(json.loads(line))
            for line in payload.splitlines()
            if line.strip()
        ]

        state = make_state(records, config=config.nb_config(), classes=LABELS)
        session = cls(session_id, sdir, config, state)
        for event in events[1:]:
            if event["type"] == "labels_submitted":
                session._apply_submission(event, replaying=True)
            elif event["type"] == "retrained":
                pass  # retraining is re-done by _apply_submission
        return session

    # -- event log ----------------------------------------------------------

    def _append_event(self, event: dict) -> None:
        event = dict(event)
        event.setdefault("at", datetime.now(timezone.utc).isoformat())
        path = os.path.join(self.directory, "events.jsonl")
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(_canonical_json(event) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    # -- queries -------------------------------------------------------------

    def get_queries(self, k_instances: int, m_features: int) -> dict:
        """Instance and feature queries against a consistent model snapshot.

        Repeated calls without new labels return identical output. Before any
        label exists there is no model, so instances are a seeded uniform
        sample of the pool (documented cold start) and features are empty.
        """
        if k_instances < 0 or m_features < 0:
            raise SessionError("query counts must be >= 0", code="invalid_request")
        with self.lock:
            self._ensure_fresh_model()
            state = self.state
            instances = []
            features = []
            if state.model is None:
                ids = sorted(state.pool.unlabeled)
                rng = random.Random(self.config.seed * 1_000_003 + state.round)
                picked = rng.sample(ids, min(k_instances, len(ids)))
                instances = [
                    {
                        "sentence_id": sid,
                        "text": state.pool.unlabeled[sid].text,
                        "entropy": None,
                        "rank": r,
                    }
                    for r, sid in enumerate(picked, start=1)
                ]
            else:
                ranked = rank_instances(
                    state.model, state.pool.unlabeled.values(), k_instances
                )
                instances = [
                    {
                        "sentence_id": q.sentence_id,
                        "text": state.pool.unlabeled[q.sentence_id].text,
                        "entropy": q.entropy,
                        "rank": q.rank,
                    }
                    for q in ranked
                ]
                if m_features > 0:
                    fq = rank_features(
                        state.model,
                        state.pool.labeled.values(),
                        state.pool.unlabeled.values(),
                        m_features,
                        exclude=state.pool.labeled_features,
                    )
                    features = [
                        {"feature": q.feature, "class": q.label, "score": q.score, "rank": q.rank}
                        for q in fq
                    ]
            return {
                "session_id": self.session_id,
                "round": state.round,
                "model_trained": state.model is not None,
                "instances": instances,
                "features": features,
            }

    def _ensure_fresh_model(self) -> None:
        if self._stale:
            if self.state.pool.labeled or self.state.pool.labeled_features:
                self.state.model = _retrain(self.state)
            self._stale = False

    # -- submissions ----------------------------------------------------------

    def submit_labels(self, instance_labels, feature_labels, rater_id: str,
                      token: str | None = None) -> dict:
        """Apply one oracle batch; idempotent per submission token.

        ``instance_labels``: [{"id", "label", "rule_ids"?}] entries;
        ``feature_labels``: [{"feature", "class"}] entries.
        """
        token = token or uuid.uuid4().hex
        with self.lock:
            if token in self._token_logs:
                return self._token_logs[token]
            event = {
                "type": "labels_submitted",
                "token": token,
                "rater_id": str(rater_id),
                "instances": [
                    {
                        "id": entry["id"],
                        "label": entry["label"],
                        **({"rule_ids": list(entry["rule_ids"])} if entry.get("rule_ids") else {}),
                    }
                    for entry in instance_labels
                ],
                "features": [
                    {"feature": entry["feature"], "class": entry["class"]}
                    for entry in feature_labels
                ],
            }
            log = self._apply_submission(event, replaying=False)
            return log

    def _apply_submission(self, event: dict, replaying: bool) -> dict:
        answers = RoundAnswers(
            instance_labels={e["id"]: e["label"] for e in event["instances"]},
            feature_labels=[(e["feature"], e["class"]) for e in event["features"]],
        )
        if len(answers.instance_labels) != len(event["instances"]):
            raise SessionError("duplicate instance id in submission", code="invalid_request")

        if self.config.defer_retrain:
            n_inst, n_feat = apply_answers(self.state, answers)
            self.state.round += 1
            self._stale = True
            log_obj = AlRoundLog(
                round=self.state.round,
                new_instance_labels=n_inst,
                new_feature_labels=n_feat,
                labeled_size=len(self.state.pool.labeled),
                unlabeled_size=len(self.state.pool.unlabeled),
                metrics={"deferred": True},
            ).to_json_obj()
        else:
            _, log = run_round(self.state, answers)
            log_obj = log.to_json_obj()

        rater_id = event["rater_id"]
        for entry in event["instances"]:
            rec = self.state.pool.labeled[entry["id"]]
            rec.rater_labels = [(rater_id, entry["label"])]
            if entry.get("rule_ids"):
                rec.rule_ids = list(entry["rule_ids"])

        if not replaying:
            self._append_event(event)
            if not self.config.defer_retrain:
                self._append_event({"type": "retrained", "round": self.state.round})
        self._token_logs[event["token"]] = log_obj
        return log_obj

    # -- reporting ------------------------------------------------------------

    def metrics(self) -> dict:
        with self.lock:
            pool = self.state.pool
            per_class = {
                c: sum(1 for r in pool.labeled.values() if r.label == c)
                for c in self.state.classes
            }
            return {
                "session_id": self.session_id,
                "round": self.state.round,
                "model_trained": self.state.model is not None,
                "labeled": len(pool.labeled),
                "unlabeled": len(pool.unlabeled),
                "labeled_per_class": per_class,
                "labeled_features": sorted(f"{f}:{c}" for f, c in pool.labeled_features),
                "guideline_version": self.guidelines["version"],
            }

    def export_dataset(self) -> str:
        """JSONL of the records labeled through the loop, sorted by id;
        byte-identical across calls."""
        with self.lock:
            rows = [
                rec.to_json()
                for _, rec in sorted(self.state.pool.labeled.items())
                if rec.provenance == "active_learning"
            ]
        return "".join(row + "\n" for row in rows)


class SessionStore:
    """All sessions under one data directory; lazily reloads from disk."""

    def __init__(self, data_dir: str | None = None):
        self.data_dir = data_dir or default_data_dir()
        self.sessions_dir = os.path.join(self.data_dir, "sessions")
        os.makedirs(self.sessions_dir, exist_ok=True)
        self._sessions: dict = {}
        self._lock = threading.Lock()

    def create_session(self, records, config: SessionConfig | None = None) -> str:
        session = Session.create(self.sessions_dir, records, config or SessionConfig())
        with self._lock:
            self._sessions[session.session_id] = session
        return session.session_id

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
            if session is None:
                session = Session.load(self.sessions_dir, session_id)
                self._sessions[session_id] = session
            return session

    def session_ids(self) -> list:
        on_disk = set(os.listdir(self.sessions_dir)) if os.path.isdir(self.sessions_dir) else set()
        with self._lock:
            return sorted(on_disk | set(self._sessions))


# -- HTTP layer -----------------------------------------------------------------

_ROUTES = [
    ("GET", re.compile(r"^/health$"), "_get_health"),
    ("GET", re.compile(r"^/guidelines$"), "_get_guidelines"),
    ("POST", re.compile(r"^/sessions$"), "_post_sessions"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/queries$"), "_get_queries"),
    ("POST", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/labels$"), "_post_labels"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/metrics$"), "_get_metrics"),
    ("GET", re.compile(r"^/sessions/(?P<sid>[0-9a-f]+)/export$"), "_get_export"),
]


class AnnotationHandler(BaseHTTPRequestHandler):
    """JSON API over a SessionStore; see module docstring for routes."""

    server_version = "topicforge"
    protocol_version = "HTTP/1.1"

    @property
    def store(self) -> SessionStore:
        return self.server.store  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):  # quiet by default
        if self.server.verbose:  # type: ignore[attr-defined]
            super().log_message(fmt, *args)

    # -- plumbing -----------------------------------------------------------

    def _send(self, status: int, body: bytes, content_type="application/json") -> None:
        self.send_response(status)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _send_json(self, status: int, obj) -> None:
        self._send(status, (_canonical_json(obj) + "\n").encode("utf-8"))

    def _send_error(self, status: int, code: str, message: str) -> None:
        self._send_json(status, {"code": code, "message": message})

    def _read_body(self):
        length = int(self.headers.get("Content-Length") or 0)
        raw = self.rfile.read(length) if length else b"{}"
        try:
            return json.loads(raw or b"{}")
        except json.JSONDecodeError as exc:
            raise SessionError(f"invalid JSON body: {exc}", code="invalid_json") from exc

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.send_header("Content-Length", "0")
        self.end_headers()

    def do_GET(self):
        self._dispatch("GET")

    def do_POST(self):
        self._dispatch("POST")

    def _dispatch(self, method: str) -> None:
        url = urlparse(self.path)
        try:
            for verb, pattern, name in _ROUTES:
                m = pattern.match(url.path)
                if not m:
                    continue
                if verb != method:
                    self._send_error(405, "method_not_allowed", f"{method} not allowed here")
                    return
                getattr(self, name)(m.groupdict(), parse_qs(url.query))
                return
            self._send_error(404, "not_found", f"no such endpoint: {url.path}")
        except SessionError as exc:
            status = 404 if exc.code == "unknown_session" else 400
            self._send_error(status, exc.code, str(exc))
        except TopicForgeError as exc:
            self._send_error(400, "invalid_request", str(exc))
        except Exception as exc:  # pragma: no cover - last resort
            self._send_error(500, "internal_error", f"{type(exc).__name__}: {exc}")

    # -- endpoints ------------------------------------------------------------

    def _get_health(self, _params, _query):
        self._send_json(200, {"status": "ok"})

    def _get_guidelines(self, _params, _query):
        self._send_json(200, load_guidelines())

    def _post_sessions(self, _params, _query):
        body = self._read_body()
        config = SessionConfig.from_json_obj(body.get("config") or {})
        if "corpus" in body:
            records = [SentenceRecord.from_json_obj(obj) for obj in body["corpus"]]
        else:
            records = self.server.default_corpus  # type: ignore[attr-defined]
            if records is None:
                raise SessionError(
                    "no corpus in request and the server has no default corpus",
                    code="empty_corpus",
                )
        sid = self.store.create_session(records, config)
        self._send_json(201, {"session_id": sid})

    def _get_queries(self, params, query):
        session = self.store.get(params["sid"])
        try:
            k = int((query.get("instances") or ["10"])[0])
            m = int((query.get("features") or ["5"])[0])
        except ValueError as exc:
            raise SessionError("instances/features must be integers", code="invalid_request") from exc
        self._send_json(200, session.get_queries(k, m))

    def _get_metrics(self, params, _query):
        self._send_json(200, self.store.get(params["sid"]).metrics())

    def _get_export(self, params, _query):
        payload = self.store.get(params["sid"]).export_dataset().encode("utf-8")
        self._send(200, payload, content_type="application/x-ndjson")

    def _post_labels(self, params, _query):
        session = self.store.get(params["sid"])
        body = self._read_body()
        for entry in body.get("instances") or []:
            if "id" not in entry or "label" not in entry:
                raise SessionError("instance entries need id and label", code="invalid_request")
        for entry in body.get("features") or []:
            if "feature" not in entry or "class" not in entry:
                raise SessionError("feature entries need feature and class", code="invalid_request")
        log = session.submit_labels(
            body.get("instances") or [],
            body.get("features") or [],
            rater_id=body.get("rater_id", "anonymous"),
            token=body.get("token"),
        )
        self._send_json(200, log)


class AnnotationServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address, store: SessionStore, default_corpus=None, verbose=False):
        super().__init__(address, AnnotationHandler)
        self.store = store
        self.default_corpus = default_corpus
        self.verbose = verbose


def make_server(port: int = 0, data_dir=None, default_corpus=None, verbose=False) -> AnnotationServer:
    store = SessionStore(data_dir)
    return AnnotationServer(("127.0.0.1", port), store, default_corpus, verbose)


def serve_forever(port: int, data_dir, default_corpus, verbose=True) -> None:
    server = AnnotationServer(("0.0.0.0", port), SessionStore(data_dir), default_corpus, verbose)
    try:
        server.serve_forever()
    finally:
        server.server_close()
