"""Request and response models for the HTTP service.

Wire shapes mirror the on-disk JSON formats: correspondences use the
e1/e2/rel/conf keys of alignment documents, findings the report keys,
answer sets the queryId/tuples keys.
"""

from __future__ import annotations

from pydantic import BaseModel, Field


class CorrespondenceModel(BaseModel):
    e1: str
    e2: str
    rel: str
    conf: float = Field(ge=0.0, le=1.0)


class AlignmentModel(BaseModel):
    onto1: str
    onto2: str
    correspondences: list[CorrespondenceModel]


class ThresholdsModel(BaseModel):
    similarity: float = Field(default=0.85, ge=0.0, le=1.0)
    locality: float = Field(default=0.5, ge=0.0, le=1.0)
    chain_length: int = Field(default=3, ge=2)
    clump_size: int = Field(default=3, ge=2)


class FindingModel(BaseModel):
    category: str
    severity: str
    entities: list[str]
    explanation: str


class ReportModel(BaseModel):
    target: str
    findings: list[FindingModel]
    counts: dict[str, int]


class RemovedCorrespondenceModel(BaseModel):
    onto1: str
    onto2: str
    e1: str
    e2: str
    rel: str
    conf: float


class LintRequest(BaseModel):
    ontology: str
    chain_length: int = Field(default=3, ge=2)
    clump_size: int = Field(default=3, ge=2)


class AlignRequest(BaseModel):
    onto1: str
    onto2: str
    theta: float = Field(default=0.85, ge=0.0, le=1.0)


class SourceDocument(BaseModel):
    ontology: str
    aboxes: list[str] = []


class MergeRequest(BaseModel):
    sources: list[str]
    alignments: list[AlignmentModel] | None = None
    theta: float = Field(default=0.85, ge=0.0, le=1.0)
    tau: float = Field(default=0.5, ge=0.0, le=1.0)
    chain_length: int = Field(default=3, ge=2)
    clump_size: int = Field(default=3, ge=2)
    repair: bool = True


class MergeResponse(BaseModel):
    merged: str
    provenance: dict[str, list[list[str]]]
    report: ReportModel
    alignments: list[AlignmentModel]
    removed: list[RemovedCorrespondenceModel]


class QueryRequest(BaseModel):
    merged: str
    provenance: dict[str, list[list[str]]]
    query: str
    query_id: str = "q"
    aboxes: list[str] = []


class AnswerSetModel(BaseModel):
    queryId: str
    tuples: list[list[str]]


class QueryDocument(BaseModel):
    id: str
    text: str


class EvalRequest(BaseModel):
    sources: list[SourceDocument]
    alignments: list[AlignmentModel] | None = None
    queries: list[QueryDocument]
    references: dict[str, list[list[str]]]
    thresholds: ThresholdsModel = ThresholdsModel()


class QueryScoreModel(BaseModel):
    queryId: str
    answered: bool
    precision: float
    recall: float
    fmeasure: float


class EvaluationModel(BaseModel):
    answered: int
    total: int
    avgPrecision: float
    avgRecall: float
    avgFmeasure: float
    hFmeasure: float
    perQuery: list[QueryScoreModel]


class DiagnosticModel(BaseModel):
    file: str
    line: int
    column: int
    message: str
    severity: str
