"""Pydantic request/response models for the HTTP API."""

from __future__ import annotations

from pydantic import BaseModel, Field


class ResponseOptionOut(BaseModel):
    code: str
    label: str


class QuestionOut(BaseModel):
    id: str
    questionnaire: str
    study: str
    year: int
    text: str
    options: list[ResponseOptionOut]
    typology: str
    topic_top: str
    topic_sub: str | None
    is_code_list: bool


class QuestionPage(BaseModel):
    total: int
    offset: int
    limit: int
    questions: list[QuestionOut]


class RunInfo(BaseModel):
    run_id: str
    model: str
    mode: str
    k: int
    n_queries: int


class CandidateOut(BaseModel):
    rank: int
    score: float
    question: QuestionOut


class CandidateList(BaseModel):
    run_id: str
    query: QuestionOut
    candidates: list[CandidateOut]


class SamplePair(BaseModel):
    query_id: str
    candidate_id: str


class SampleOut(BaseModel):
    run_id: str
    n: int
    seed: int
    pairs: list[SamplePair]


class AnnotationIn(BaseModel):
    query_id: str
    candidate_id: str
    label: str
    annotator: str = Field(min_length=1)
    run_id: str


class AnnotationOut(BaseModel):
    query_id: str
    candidate_id: str
    label: str
    annotator: str
    run_id: str
    timestamp: str


class LabelStats(BaseModel):
    run_id: str | None
    total: int
    distribution: dict[str, float]


class ClassMetricsOut(BaseModel):
    precision: float
    recall: float
    f1: float
    support: int


class EvalOut(BaseModel):
    run_id: str
    averaging: str
    n_queries: int
    precision: float
    recall: float
    f1: float
    accuracy: float
    per_class: dict[str, ClassMetricsOut]
    table: str


class ErrorBody(BaseModel):
    code: str
    message: str
