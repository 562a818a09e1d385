"""HTTP facade over a workspace.

One process serves one workspace: a shared datastore, at most one engine
built from the latest trained artifacts, and in-memory chat sessions.
Pipeline stages run in a background thread, one at a time; chat turns are
serialized so concurrent requests cannot interleave a transaction.
"""

from __future__ import annotations

import dataclasses
import re
import threading
from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..benchmark import run_benchmark
from ..engine import DialogueState
from ..errors import (
    AgentNotReady,
    CatforgeError,
    IoError,
    MissingTemplate,
    NotFound,
    ValidationError,
)
from ..schema import ColumnAnnotation, Schema, schema_to_dict
from ..workspace import Workspace
from .models import (
    AgentResponseOut,
    AnnotationOut,
    AnnotationsPut,
    BenchmarkCreated,
    BenchmarkIn,
    MessageIn,
    PipelineStatusOut,
    SessionOut,
    TranscriptOut,
    TransactionOut,
)


class PipelineBusy(CatforgeError):
    def __init__(self, stage: str):
        self.stage = stage
        super().__init__(f"pipeline stage already running: {stage}")


class UnknownSession(CatforgeError):
    def __init__(self, session_id: str):
        super().__init__(f"no session {session_id!r}")


class UnknownReport(CatforgeError):
    def __init__(self, report_id: str):
        super().__init__(f"no benchmark report {report_id!r}")


_STATUS_BY_TYPE = {
    AgentNotReady: 409,
    PipelineBusy: 409,
    NotFound: 404,
    UnknownSession: 404,
    UnknownReport: 404,
    IoError: 500,
    MissingTemplate: 500,
}


def _error_code(exc: Exception) -> str:
    return re.sub(r"(?<!^)(?=[A-Z])", "_", type(exc).__name__).lower()


class ServiceState:
    """Mutable runtime shared by all request handlers."""

    def __init__(self, workspace: Workspace):
        self.workspace = workspace
        self.store = workspace.build_store()
        self.engine = workspace.build_engine(store=self.store) if workspace.is_ready() else None
        self.lock = threading.Lock()  # sessions, stage flags, engine swaps
        self.chat_lock = threading.Lock()  # one dialogue/benchmark step at a time
        self.stage: str | None = None
        self.stage_error: str | None = None
        self.sessions: dict[str, DialogueState] = {}
        self.session_counter = 0
        self.reports: dict[str, dict] = {}
        self.report_counter = 0

    def require_engine(self):
        engine = self.engine
        if engine is None:
            raise AgentNotReady("pipeline has not produced a trained model yet")
        return engine

    def session(self, session_id: str) -> DialogueState:
        state = self.sessions.get(session_id)
        if state is None:
            raise UnknownSession(session_id)
        return state

    # -- pipeline stages ----------------------------------------------------------

    def start_stage(self, name: str, work) -> None:
        with self.lock:
            if self.stage is not None:
                raise PipelineBusy(self.stage)
            self.stage = name
            self.stage_error = None
        threading.Thread(target=self._run_stage, args=(work,), daemon=True).start()

    def _run_stage(self, work) -> None:
        try:
            work()
        except Exception as exc:
            self.stage_error = f"{_error_code(exc)}: {exc}"
        finally:
            with self.lock:
                self.stage = None

    def train_and_reload(self) -> None:
        if self.engine is not None:  # keep what live sessions taught us
            self.workspace.save_awareness_state(self.engine.awareness)
        self.workspace.train()
        engine = self.workspace.build_engine(store=self.store)
        with self.lock:
            self.engine = engine

    # -- annotations --------------------------------------------------------------

    def apply_annotations(self, updates: dict) -> Schema:
        schema = self.workspace.schema()
        problems = []
        for qualified, patch in updates.items():
            table_name, _, column_name = qualified.partition(".")
            if not schema.has_table(table_name) or not schema.table(table_name).has_column(column_name):
                problems.append(f"unknown column {qualified!r}")
                continue
            current = schema.column(qualified).annotation
            fields = {k: v for k, v in patch.items() if v is not None}
            if "awareness_prior" in fields:
                fields["awareness_prior"] = tuple(fields["awareness_prior"])
            annotation = dataclasses.replace(current, **fields)
            problems.extend(annotation.validate(qualified))
            schema = _with_annotation(schema, table_name, column_name, annotation)
        if problems:
            raise ValidationError(problems)
        self.workspace.save_schema(schema)
        with self.lock:
            self.store.replace_schema(schema)
            if self.engine is not None:
                self.engine.awareness.schema = schema
        return schema


def _with_annotation(
    schema: Schema, table_name: str, column_name: str, annotation: ColumnAnnotation
) -> Schema:
    tables = []
    for table in schema.tables:
        if table.name == table_name:
            columns = tuple(
                dataclasses.replace(col, annotation=annotation) if col.name == column_name else col
                for col in table.columns
            )
            table = dataclasses.replace(table, columns=columns)
        tables.append(table)
    return dataclasses.replace(schema, tables=tuple(tables))


def _annotations_payload(schema: Schema) -> dict[str, AnnotationOut]:
    out = {}
    for table in schema.tables:
        for col in table.columns:
            out[f"{table.name}.{col.name}"] = AnnotationOut(
                request_preference=col.annotation.request_preference,
                awareness_prior=col.annotation.awareness_prior,
                display_name=col.display_name,
            )
    return out


def _response_payload(response) -> AgentResponseOut:
    transaction = None
    if response.transaction is not None:
        transaction = TransactionOut(
            task=response.transaction.task,
            outcome=response.transaction.outcome,
            rows_affected=response.transaction.rows_affected,
            reason=response.transaction.reason,
        )
    return AgentResponseOut(
        action=response.action,
        text=response.text,
        choices=list(response.choices),
        transaction=transaction,
    )


def create_app(workspace: Workspace, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="cat-forge", docs_url=None, redoc_url=None)
    state = ServiceState(workspace)
    app.state.service = state

    @app.exception_handler(CatforgeError)
    def catforge_error(request: Request, exc: CatforgeError):
        status = 422
        for cls, code in _STATUS_BY_TYPE.items():
            if isinstance(exc, cls):
                status = code
                break
        return JSONResponse(
            status_code=status,
            content={"error": {"code": _error_code(exc), "message": str(exc)}},
        )

    @app.exception_handler(RequestValidationError)
    def invalid_request(request: Request, exc: RequestValidationError):
        detail = "; ".join(
            f"{'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in exc.errors()
        )
        return JSONResponse(
            status_code=422,
            content={"error": {"code": "invalid_request", "message": detail}},
        )

    # -- sessions ---------------------------------------------------------------

    @app.post("/sessions", response_model=SessionOut, status_code=201)
    def create_session():
        state.require_engine()
        with state.lock:
            state.session_counter += 1
            session_id = f"s{state.session_counter}"
            state.sessions[session_id] = DialogueState(session_id=session_id)
        return SessionOut(id=session_id)

    @app.post("/sessions/{session_id}/messages", response_model=AgentResponseOut)
    def post_message(session_id: str, message: MessageIn):
        engine = state.require_engine()
        dialogue = state.session(session_id)
        with state.chat_lock:
            _, response = engine.step(dialogue, message.text)
        return _response_payload(response)

    @app.get("/sessions/{session_id}/transcript", response_model=TranscriptOut)
    def transcript(session_id: str):
        dialogue = state.session(session_id)
        return TranscriptOut(id=session_id, turns=list(dialogue.transcript))

    # -- schema -------------------------------------------------------------------

    @app.get("/schema")
    def get_schema():
        return schema_to_dict(state.workspace.schema())

    @app.get("/schema/annotations", response_model=dict[str, AnnotationOut])
    def get_annotations():
        return _annotations_payload(state.workspace.schema())

    @app.put("/schema/annotations", response_model=dict[str, AnnotationOut])
    def put_annotations(body: AnnotationsPut):
        updates = {k: v.model_dump() for k, v in body.annotations.items()}
        return _annotations_payload(state.apply_annotations(updates))

    # -- pipeline -----------------------------------------------------------------

    def _status(stage_override: str | None = None) -> PipelineStatusOut:
        stage = stage_override if stage_override is not None else state.stage
        status = state.workspace.status(stage=stage)
        doc = status.to_dict()
        return PipelineStatusOut(**doc, error=state.stage_error)

    @app.post("/pipeline/generate", response_model=PipelineStatusOut, status_code=202)
    def pipeline_generate():
        state.start_stage("generating", state.workspace.generate)
        return _status("generating")

    @app.post("/pipeline/train", response_model=PipelineStatusOut, status_code=202)
    def pipeline_train():
        state.start_stage("training", state.train_and_reload)
        return _status("training")

    @app.get("/pipeline/status", response_model=PipelineStatusOut)
    def pipeline_status():
        return _status()

    # -- benchmark ----------------------------------------------------------------

    @app.post("/benchmark", response_model=BenchmarkCreated, status_code=201)
    def post_benchmark(body: BenchmarkIn):
        with state.chat_lock:
            report = run_benchmark(
                state.store,
                strategies=tuple(body.strategies),
                n_trials=body.trials,
                seed=body.seed,
                base_table=body.base_table,
                config=state.workspace.config.policy,
            )
        with state.lock:
            state.report_counter += 1
            report_id = f"b{state.report_counter}"
            state.reports[report_id] = report.to_dict()
        return BenchmarkCreated(id=report_id, report=state.reports[report_id])

    @app.get("/benchmark/{report_id}")
    def get_benchmark(report_id: str):
        report = state.reports.get(report_id)
        if report is None:
            raise UnknownReport(report_id)
        return report

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
