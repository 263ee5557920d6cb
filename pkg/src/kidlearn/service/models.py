"""Request and response shapes of the tutoring service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str
    version: str


class ValidateRequest(BaseModel):
    config: dict


class ValidateResponse(BaseModel):
    valid: bool
    problems: list[str]


class SessionCreate(BaseModel):
    condition: str = "zpdes"
    seed: int = 0
    steps_budget: int | None = Field(
        default=None, description="Optional hard cap on exercises served")
    bandit: dict = Field(default_factory=dict)
    zpd_overrides: dict = Field(default_factory=dict)


class SessionInfo(BaseModel):
    session_id: str
    condition: str
    t: int


class ObjectOut(BaseModel):
    id: str
    name: str
    price_cents: int
    price_display: str


class ContentOut(BaseModel):
    role: str
    exercise_type: str
    level: int
    carried_numbers: str
    price_presentation: str
    money_shape: str
    objects: list[ObjectOut]
    paid_cents: int | None
    paid_display: str | None
    wallet: list[int]
    trials_left: int


class ChoiceOut(BaseModel):
    options: list[list[ObjectOut]]


class NextResponse(BaseModel):
    session_id: str
    t: int
    awaiting: str  # "choice" or "answer"
    content: ContentOut | None = None
    choice: ChoiceOut | None = None
    done: bool = False


class ChoiceRequest(BaseModel):
    option: int


class AnswerRequest(BaseModel):
    denominations: list[int]


class AnswerResponse(BaseModel):
    correct: bool
    trials_left: int
    exercise_over: bool
    outcome: int | None = None
    solution: list[int] | None = None


class TraceRow(BaseModel):
    t: int
    exercise_type: str
    level: int
    carried_numbers: str
    price_presentation: str
    money_shape: str
    outcome: int
    choice: int
    step_label: str


class TraceResponse(BaseModel):
    session_id: str
    condition: str
    rows: list[TraceRow]


class ScoresResponse(BaseModel):
    session_id: str
    t: list[int]
    reached: list[float]
    success: list[float]


class ExperimentRequest(BaseModel):
    config: dict
    out_dir: str
    seed: int | None = None


class ExperimentResponse(BaseModel):
    out_dir: str
    manifest: dict


class SweepRequest(BaseModel):
    config: dict
    param: str
    values: list
    out_dir: str


class SweepRunOut(BaseModel):
    param: str
    value: str
    out_dir: str


class SweepResponse(BaseModel):
    out_dir: str
    runs: list[SweepRunOut]


class ReportRequest(BaseModel):
    traces_dir: str
    out_dir: str


class ReportResponse(BaseModel):
    files: list[str]
