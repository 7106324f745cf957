"""HTTP service for the human-in-the-loop annotation cycle.

A session pairs a labeled training set with an unlabeled pool.  The
annotator pulls uncertainty-ranked batches, submits grade levels, and
triggers synchronous retrains; a second annotator's labels feed an
agreement ledger instead of the training set.  Every mutation is appended
to a per-session event log so a restart replays to the identical state.
"""

import json
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, ConfigDict

from .corpusio import CorpusIOError, read_corpus, read_feature_matrix, write_feature_matrix
from .data import DataError, Dataset, LabeledInstance
from .evaluation import EvalConfig, EvaluationError, cohen_kappa, cross_validate
from .learnloop import STRATEGIES, LearnloopError, select_batch
from .svm import (
    UNAVAILABLE_POLICIES,
    UNCERTAINTY_METHODS,
    MulticlassModel,
    TrainConfig,
    TrainingError,
    train_multiclass,
)

SESSION_ID_PATTERN = re.compile(r"^[A-Za-z0-9_-]{1,64}$")


class ServiceError(Exception):
    """Request-level failure carrying a machine code and an HTTP status."""

    def __init__(self, status_code: int, code: str, message: str) -> None:
        super().__init__(message)
        self.status_code = status_code
        self.code = code
        self.message = message


@dataclass(frozen=True)
class SessionConfig:
    """Tunables fixed at session creation; echoed back by status."""

    k: int = 10
    strategy: str = "most_uncertain"
    method: str = "min"
    c: float = 1.0
    tolerance: float = 1e-4
    max_iterations: int = 10000
    train_seed: int = 0
    eval_k: int = 10
    eval_seed: int = 0
    stratified: bool = True
    session_seed: int = 0
    on_unavailable: str = "error"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ServiceError(422, "bad_config", "k must be a positive integer")
        if self.strategy not in STRATEGIES:
            raise ServiceError(422, "bad_config", f"unknown strategy: {self.strategy}")
        if self.method not in UNCERTAINTY_METHODS:
            raise ServiceError(422, "bad_config", f"unknown method: {self.method}")
        if self.on_unavailable not in UNAVAILABLE_POLICIES:
            raise ServiceError(
                422, "bad_config", f"unknown policy: {self.on_unavailable}"
            )
        try:
            self.train_config()
            self.eval_config()
        except (TrainingError, EvaluationError) as exc:
            raise ServiceError(422, "bad_config", str(exc))

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            C=self.c,
            tolerance=self.tolerance,
            max_iterations=self.max_iterations,
            seed=self.train_seed,
        )

    def eval_config(self) -> EvalConfig:
        return EvalConfig(k=self.eval_k, seed=self.eval_seed, stratified=self.stratified)

    def as_dict(self) -> dict:
        return {
            "k": self.k,
            "strategy": self.strategy,
            "method": self.method,
            "c": self.c,
            "tolerance": self.tolerance,
            "max_iterations": self.max_iterations,
            "train_seed": self.train_seed,
            "eval_k": self.eval_k,
            "eval_seed": self.eval_seed,
            "stratified": self.stratified,
            "session_seed": self.session_seed,
            "on_unavailable": self.on_unavailable,
        }


def config_from_payload(payload: dict) -> SessionConfig:
    known = set(SessionConfig.__dataclass_fields__)
    unknown = set(payload) - known
    if unknown:
        raise ServiceError(
            422, "bad_config", f"unknown config fields: {', '.join(sorted(unknown))}"
        )
    try:
        return SessionConfig(**payload)
    except ServiceError:
        raise
    except (TypeError, ValueError) as exc:
        raise ServiceError(422, "bad_config", str(exc))


@dataclass
class Session:
    """In-memory state rebuilt from the event log on startup."""

    session_id: str
    directory: Path
    labeled: Dataset
    pool: Dataset
    texts: dict
    config: SessionConfig
    total: int
    model: MulticlassModel | None = None
    history: list = field(default_factory=list)
    in_flight: dict = field(default_factory=dict)
    cold_start: bool = False
    truncated: bool = False
    batches_issued: int = 0
    first_annotator: dict = field(default_factory=dict)
    second_labels: dict = field(default_factory=dict)
    audit: list = field(default_factory=list)
    lock: threading.Lock = field(default_factory=threading.Lock)

    def check_invariants(self) -> None:
        overlap = set(self.labeled.ids) & set(self.pool.ids)
        if overlap:
            raise RuntimeError(f"document in both pool and labeled set: {overlap}")
        if len(self.labeled) + len(self.pool) != self.total:
            raise RuntimeError("labeled + pool size drifted from the session total")
        missing = set(self.in_flight) - set(self.pool.ids)
        if missing:
            raise RuntimeError(f"batch references documents not in pool: {missing}")

    def current_levels(self) -> dict:
        return {inst.id: inst.level for inst in self.labeled.instances}

    def agreement_pairs(self) -> tuple[list, list]:
        levels = self.current_levels()
        first, second = [], []
        for doc_id, (_, level) in self.second_labels.items():
            if doc_id in levels:
                first.append(levels[doc_id])
                second.append(level)
        return first, second


def _append_event(session: Session, event: dict) -> None:
    with (session.directory / "events.jsonl").open("a", encoding="utf-8") as fh:
        fh.write(json.dumps(event, sort_keys=True) + "\n")


def _parse_matrix(directory: Path, name: str, content: str) -> Dataset:
    path = directory / name
    path.write_text(content, encoding="utf-8")
    try:
        return read_feature_matrix(path, allow_subset=True)
    except (CorpusIOError, DataError) as exc:
        raise ServiceError(422, "bad_matrix", f"{name}: {exc}")


def _parse_corpus_texts(directory: Path, content: str) -> dict:
    path = directory / "corpus.jsonl"
    path.write_text(content, encoding="utf-8")
    try:
        result = read_corpus(path, strict=True)
    except CorpusIOError as exc:
        raise ServiceError(422, "bad_corpus", str(exc))
    texts = {}
    for record in result.records:
        if record.text is not None:
            texts[record.id] = record.text
        else:
            texts[record.id] = " ".join(
                str(token.get("surface", "")) for token in record.tokens
            )
    return texts


def build_session(
    state_dir: Path,
    session_id: str,
    labeled_csv: str,
    pool_csv: str,
    corpus: str | None,
    config: SessionConfig,
) -> Session:
    directory = state_dir / session_id
    directory.mkdir(parents=True, exist_ok=True)
    labeled = _parse_matrix(directory, "labeled.csv", labeled_csv)
    pool = _parse_matrix(directory, "pool.csv", pool_csv)
    if labeled.feature_names != pool.feature_names:
        raise ServiceError(
            422, "bad_matrix", "labeled and pool matrices disagree on features"
        )
    unlabeled = [inst.id for inst in labeled.instances if inst.level is None]
    if unlabeled:
        raise ServiceError(
            422, "bad_matrix", f"labeled matrix has unlabeled rows: {unlabeled[:5]}"
        )
    stray = [inst.id for inst in pool.instances if inst.level is not None]
    if stray:
        raise ServiceError(
            422, "bad_matrix", f"pool matrix must be unlabeled, got levels on: {stray[:5]}"
        )
    overlap = set(labeled.ids) & set(pool.ids)
    if overlap:
        raise ServiceError(
            422, "bad_matrix", f"ids appear in both matrices: {sorted(overlap)[:5]}"
        )
    texts = _parse_corpus_texts(directory, corpus) if corpus else {}
    return Session(
        session_id=session_id,
        directory=directory,
        labeled=labeled,
        pool=pool,
        texts=texts,
        config=config,
        total=len(labeled) + len(pool),
    )


def _batch_payload(session: Session) -> dict:
    return {
        "session_id": session.session_id,
        "batch": [
            {"id": doc_id, "text": session.texts.get(doc_id, ""), "score": score}
            for doc_id, score in session.in_flight.items()
        ],
        "cold_start": session.cold_start,
        "truncated": session.truncated,
    }


def issue_batch(session: Session, k: int, log: bool = True) -> dict:
    """Serve the next batch, or re-serve the one still awaiting labels."""
    if session.in_flight:
        return _batch_payload(session)
    if len(session.pool) == 0:
        raise ServiceError(409, "pool_exhausted", "pool exhausted")
    if session.model is None:
        # no model yet: seeded random sample, flagged as a cold start
        rng = np.random.default_rng((session.config.session_seed, session.batches_issued))
        size = min(k, len(session.pool))
        picks = rng.choice(len(session.pool), size=size, replace=False)
        ids = [session.pool.instances[int(i)].id for i in picks]
        scores = [0.0] * size
        cold_start, truncated = True, k > len(session.pool)
    else:
        batch = select_batch(
            session.model, session.pool, k, session.config.strategy, session.config.method
        )
        ids = list(batch.document_ids)
        scores = [float(s) for s in batch.scores]
        cold_start, truncated = False, batch.truncated
    restore_batch(
        session,
        {"ids": ids, "scores": scores, "cold_start": cold_start, "truncated": truncated},
    )
    if log:
        _append_event(
            session,
            {
                "event": "batch",
                "ids": ids,
                "scores": scores,
                "cold_start": cold_start,
                "truncated": truncated,
                "k": k,
            },
        )
    return _batch_payload(session)


def restore_batch(session: Session, event: dict) -> None:
    session.in_flight = dict(zip(event["ids"], event["scores"]))
    session.cold_start = bool(event["cold_start"])
    session.truncated = bool(event["truncated"])
    session.batches_issued += 1


def apply_labels(
    session: Session,
    annotator: str,
    labels: list,
    timestamp: float,
    log: bool = True,
) -> dict:
    """Move freshly labeled documents out of the pool, atomically.

    A repeat label from the first annotator overwrites the training label
    with an audit entry; a label from anyone else lands in the agreement
    ledger and never touches the training set.
    """
    relabelable = set(session.first_annotator)
    for item in labels:
        level = item["level"]
        if not isinstance(level, int) or not 1 <= level <= 5:
            raise ServiceError(422, "invalid_level", f"level must be 1..5, got {level!r}")
        doc_id = item["document_id"]
        if doc_id not in session.in_flight and doc_id not in relabelable:
            raise ServiceError(
                422, "not_in_batch", f"document {doc_id} is not in the current batch"
            )

    accepted = 0
    pool_ids = list(session.pool.ids)
    for item in labels:
        doc_id = item["document_id"]
        level = item["level"]
        who = item.get("annotator") or annotator
        entry = {
            "document_id": doc_id,
            "annotator": who,
            "level": level,
            "timestamp": timestamp,
        }
        if doc_id in session.in_flight:
            position = pool_ids.index(doc_id)
            instance = session.pool.instances[position]
            promoted = LabeledInstance(
                id=instance.id,
                vector=instance.vector,
                level=level,
                source=instance.source,
            )
            session.labeled = session.labeled.with_instances([promoted])
            keep = [i for i in range(len(pool_ids)) if i != position]
            session.pool = session.pool.subset(keep)
            pool_ids.pop(position)
            session.first_annotator[doc_id] = who
            del session.in_flight[doc_id]
            entry["action"] = "label"
        elif who == session.first_annotator[doc_id]:
            instances = list(session.labeled.instances)
            for i, inst in enumerate(instances):
                if inst.id == doc_id:
                    instances[i] = LabeledInstance(
                        id=inst.id, vector=inst.vector, level=level, source=inst.source
                    )
                    break
            session.labeled = Dataset(
                instances=tuple(instances),
                feature_names=session.labeled.feature_names,
                level_mapping=session.labeled.level_mapping,
            )
            entry["action"] = "overwrite"
        else:
            session.second_labels[doc_id] = (who, level)
            entry["action"] = "second"
        session.audit.append(entry)
        accepted += 1

    session.check_invariants()
    if log:
        _append_event(
            session,
            {
                "event": "labels",
                "annotator": annotator,
                "labels": labels,
                "timestamp": timestamp,
            },
        )
    return {
        "session_id": session.session_id,
        "accepted": accepted,
        "labeled_size": len(session.labeled),
        "pool_size": len(session.pool),
        "batch_remaining": len(session.in_flight),
    }


def run_retrain(session: Session, log: bool = True) -> dict:
    """Train on the labeled set, cross-validate, append a history row."""
    cfg = session.config
    try:
        model = train_multiclass(
            session.labeled, cfg.train_config(), on_unavailable=cfg.on_unavailable
        )
        report = cross_validate(
            session.labeled,
            cfg.train_config(),
            cfg.eval_config(),
            on_unavailable=cfg.on_unavailable,
        )
    except (TrainingError, EvaluationError, DataError, LearnloopError) as exc:
        raise ServiceError(409, "not_trainable", str(exc))
    step = len(session.history) + 1
    write_feature_matrix(session.labeled, session.directory / f"snapshot-{step:03d}.csv")
    row = {
        "step": step,
        "size": len(session.labeled),
        "mean_accuracy": report.mean_accuracy,
        "spread": report.spread,
    }
    session.history.append(row)
    session.model = model
    if log:
        _append_event(session, {"event": "retrain"})
    return {
        "session_id": session.session_id,
        **row,
        "k_folds": cfg.eval_k,
        "eval_seed": cfg.eval_seed,
        "train_seed": cfg.train_seed,
    }


def session_status(session: Session) -> dict:
    return {
        "session_id": session.session_id,
        "history": list(session.history),
        "label_counts": {str(k): v for k, v in session.labeled.level_counts().items()},
        "labeled_size": len(session.labeled),
        "pool_size": len(session.pool),
        "strategy": session.config.strategy,
        "k": session.config.k,
        "has_model": session.model is not None,
        "batch_in_flight": list(session.in_flight) or None,
        "double_labeled": len(session.second_labels),
        "audit_entries": len(session.audit),
        "config": session.config.as_dict(),
    }


def session_agreement(session: Session) -> dict:
    first, second = session.agreement_pairs()
    if not first:
        raise ServiceError(409, "no_pairs", "no doubly-labeled documents yet")
    report = cohen_kappa(first, second)
    return {
        "session_id": session.session_id,
        "kappa": report.kappa,
        "observed_agreement": report.observed_agreement,
        "expected_agreement": report.expected_agreement,
        "band": report.band,
        "degenerate": report.degenerate,
        "pairs": len(first),
    }


class SessionStore:
    """Holds live sessions and replays persisted ones at startup."""

    def __init__(self, state_dir: Path) -> None:
        self.state_dir = Path(state_dir)
        self.sessions: dict = {}
        self.lock = threading.Lock()

    def load(self) -> None:
        if not self.state_dir.exists():
            return
        for log_path in sorted(self.state_dir.glob("*/events.jsonl")):
            session = self._replay(log_path)
            self.sessions[session.session_id] = session

    def _replay(self, log_path: Path) -> Session:
        events = [
            json.loads(line)
            for line in log_path.read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
        head = events[0]
        if head.get("event") != "create":
            raise RuntimeError(f"{log_path}: log does not start with a create event")
        session = build_session(
            self.state_dir,
            head["session_id"],
            head["labeled_matrix"],
            head["pool_matrix"],
            head.get("corpus"),
            config_from_payload(head["config"]),
        )
        for event in events[1:]:
            kind = event.get("event")
            if kind == "batch":
                restore_batch(session, event)
            elif kind == "labels":
                apply_labels(
                    session,
                    event["annotator"],
                    event["labels"],
                    event["timestamp"],
                    log=False,
                )
            elif kind == "retrain":
                run_retrain(session, log=False)
            else:
                raise RuntimeError(f"{log_path}: unknown event {kind!r}")
        return session

    def create(
        self,
        session_id: str | None,
        labeled_csv: str,
        pool_csv: str,
        corpus: str | None,
        config_payload: dict,
    ) -> Session:
        sid = session_id or uuid.uuid4().hex
        if not SESSION_ID_PATTERN.match(sid):
            raise ServiceError(
                422, "bad_session_id", "session_id must match [A-Za-z0-9_-]{1,64}"
            )
        config = config_from_payload(config_payload)
        with self.lock:
            if sid in self.sessions:
                raise ServiceError(409, "session_exists", f"session {sid} already exists")
            session = build_session(
                self.state_dir, sid, labeled_csv, pool_csv, corpus, config
            )
            _append_event(
                session,
                {
                    "event": "create",
                    "session_id": sid,
                    "labeled_matrix": labeled_csv,
                    "pool_matrix": pool_csv,
                    "corpus": corpus,
                    "config": config_payload,
                },
            )
            self.sessions[sid] = session
        return session

    def get(self, session_id: str) -> Session:
        try:
            return self.sessions[session_id]
        except KeyError:
            raise ServiceError(404, "unknown_session", f"unknown session: {session_id}")


class LabelIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    document_id: str
    level: int
    annotator: str | None = None


class SubmitIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    annotator: str = "annotator"
    labels: list[LabelIn]


class CreateIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    labeled_matrix: str
    pool_matrix: str
    corpus: str | None = None
    session_id: str | None = None
    config: dict = {}


def create_app(state_dir, frontend_dir=None) -> FastAPI:
    """Build the service app; replays any event logs found in state_dir."""
    app = FastAPI(title="readlevel annotation service")
    store = SessionStore(Path(state_dir))
    store.state_dir.mkdir(parents=True, exist_ok=True)
    store.load()
    app.state.store = store

    @app.exception_handler(ServiceError)
    async def service_error(request, exc: ServiceError):
        return JSONResponse(
            status_code=exc.status_code,
            content={"error": exc.code, "message": exc.message},
        )

    @app.exception_handler(RequestValidationError)
    async def validation_error(request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        location = ".".join(str(part) for part in first.get("loc", ()))
        message = f"{location}: {first.get('msg', 'invalid request')}"
        return JSONResponse(
            status_code=422, content={"error": "validation_error", "message": message}
        )

    @app.post("/api/v1/sessions", status_code=201)
    def create_session(body: CreateIn):
        session = store.create(
            body.session_id, body.labeled_matrix, body.pool_matrix, body.corpus, body.config
        )
        return {
            "session_id": session.session_id,
            "labeled_size": len(session.labeled),
            "pool_size": len(session.pool),
            "feature_count": len(session.labeled.feature_names),
            "config": session.config.as_dict(),
        }

    @app.get("/api/v1/sessions/{session_id}/batch")
    def next_batch(session_id: str, k: int | None = None):
        session = store.get(session_id)
        size = k if k is not None else session.config.k
        if size < 1:
            raise ServiceError(422, "bad_request", "k must be a positive integer")
        with session.lock:
            return issue_batch(session, size)

    @app.post("/api/v1/sessions/{session_id}/labels")
    def submit_labels(session_id: str, body: SubmitIn):
        session = store.get(session_id)
        labels = [
            {"document_id": item.document_id, "level": item.level, "annotator": item.annotator}
            for item in body.labels
        ]
        with session.lock:
            return apply_labels(session, body.annotator, labels, time.time())

    @app.post("/api/v1/sessions/{session_id}/retrain")
    def retrain(session_id: str):
        session = store.get(session_id)
        with session.lock:
            return run_retrain(session)

    @app.get("/api/v1/sessions/{session_id}/status")
    def status(session_id: str):
        return session_status(store.get(session_id))

    @app.get("/api/v1/sessions/{session_id}/agreement")
    def agreement(session_id: str):
        return session_agreement(store.get(session_id))

    if frontend_dir is not None:
        frontend = Path(frontend_dir)
        if not frontend.is_dir():
            raise ValueError(f"frontend directory not found: {frontend}")
        app.mount("/", StaticFiles(directory=frontend, html=True), name="frontend")

    return app
