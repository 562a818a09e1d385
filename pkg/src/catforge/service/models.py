"""Request and response bodies for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field


class MessageIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    text: str = Field(min_length=1, max_length=2000)


class TransactionOut(BaseModel):
    task: str
    outcome: str
    rows_affected: int
    reason: str = ""


class AgentResponseOut(BaseModel):
    action: str
    text: str
    choices: list[str] = []
    transaction: TransactionOut | None = None


class SessionOut(BaseModel):
    id: str


class TranscriptOut(BaseModel):
    id: str
    turns: list[dict]


class AnnotationIn(BaseModel):
    """Partial update; omitted fields keep their current values."""

    model_config = ConfigDict(extra="forbid")

    request_preference: str | None = None
    awareness_prior: tuple[int, int] | None = None
    display_name: str | None = None


class AnnotationsPut(BaseModel):
    model_config = ConfigDict(extra="forbid")

    annotations: dict[str, AnnotationIn] = Field(min_length=1)


class AnnotationOut(BaseModel):
    request_preference: str
    awareness_prior: tuple[int, int]
    display_name: str


class PipelineStatusOut(BaseModel):
    stage: str
    counts: dict[str, int]
    timestamps: dict[str, str]
    error: str | None = None


class PipelineCounts(BaseModel):
    """Synchronous result of a finished pipeline stage (CLI path)."""

    counts: dict[str, int]


class BenchmarkIn(BaseModel):
    model_config = ConfigDict(extra="forbid")

    trials: int = Field(default=100, ge=1, le=100_000)
    seed: int = 42
    strategies: list[str] = ["data_aware", "static", "random"]
    base_table: str = "customer"


class BenchmarkCreated(BaseModel):
    id: str
    report: dict
