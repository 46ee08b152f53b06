"""Request/response models of the HTTP API. The JSON shapes are versioned;
bump SCHEMA_VERSION on any incompatible change."""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field

SCHEMA_VERSION = 1


class ModelRequest(BaseModel):
    model: str = Field(description="decision model source text")


class FactsRequest(ModelRequest):
    facts: str = Field(default="", description="facts, one 'var = value' or 'var in {..}' per line/;")


class DecideRequest(FactsRequest):
    table: Optional[str] = None


class DecisionOutcome(BaseModel):
    variable: str
    status: str  # value | undefined | inconsistent | hit_policy_violation
    decision: Optional[str] = None
    candidates: list[str] = []
    firedRows: list[int] = []
    stateSize: int = 0
    note: str = ""


class DecideResponse(BaseModel):
    version: int = SCHEMA_VERSION
    status: str
    results: list[DecisionOutcome]


class StateResponse(BaseModel):
    version: int = SCHEMA_VERSION
    stateSize: int
    worlds: list[dict[str, str]]


class CheckIssue(BaseModel):
    state: dict[str, list[str]]
    status: str
    candidates: list[str] = []
    firedRows: list[int] = []


class CheckResponse(BaseModel):
    version: int = SCHEMA_VERSION
    table: str
    complete: bool
    issues: list[CheckIssue]


class CompileResponse(BaseModel):
    version: int = SCHEMA_VERSION
    theory: str


class OptimalRequest(FactsRequest):
    utility: str = Field(description="utility grid CSV")
    criterion: str = Field(description="maximin|maximax|leximin|hurwicz:ALPHA|minimax-regret")
    table: Optional[str] = None


class OptimalResponse(BaseModel):
    version: int = SCHEMA_VERSION
    status: str  # value | tie | inconsistent
    decision: Optional[str] = None
    candidates: list[str] = []
    stateSize: int = 0


class MinimalRequest(ModelRequest):
    target: str
    table: Optional[str] = None


class ProfileModel(BaseModel):
    values: dict[str, list[str]]


class MinimalResponse(BaseModel):
    version: int = SCHEMA_VERSION
    target: str
    profiles: list[ProfileModel]


class RowStatusModel(BaseModel):
    row: int
    cellTruths: list[bool]
    firstFailingCell: Optional[int] = None


class ExplainResponse(BaseModel):
    version: int = SCHEMA_VERSION
    result: DecisionOutcome
    firedRows: list[RowStatusModel]
    blockedRows: list[RowStatusModel]


class MapEntry(BaseModel):
    state: dict[str, list[str]]
    status: str
    decision: Optional[str] = None


class MapResponse(BaseModel):
    version: int = SCHEMA_VERSION
    table: str
    entries: list[MapEntry]


class ErrorDetail(BaseModel):
    message: str
    line: Optional[int] = None
    col: Optional[int] = None
