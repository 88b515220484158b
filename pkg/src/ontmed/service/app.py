"""FastAPI service exposing the pipeline stages over HTTP.

Documents travel in request bodies as text, so the service never touches
server-local paths. Run with:

    uvicorn ontmed.service.app:app
"""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse

from ontmed import __version__, docio
from ontmed.align import AlignmentError, compute_alignment
from ontmed.docio import ParseError
from ontmed.evaluate import round_half_up
from ontmed.mediate import MediationError, answer_query, build_store
from ontmed.merge import MergeError
from ontmed.model import OntologyError
from ontmed.pipeline import (
    PipelineError,
    answer_all,
    build_global,
    evaluate_answers,
    lint_global,
    stores_from_abox_documents,
)
from ontmed.quality import lint

from .schemas import (
    AlignRequest,
    AlignmentModel,
    AnswerSetModel,
    EvalRequest,
    EvaluationModel,
    LintRequest,
    MergeRequest,
    MergeResponse,
    QueryRequest,
    ReportModel,
)

app = FastAPI(
    title="ontmed",
    version=__version__,
    description="Ontology mediation: align, merge, lint, and query "
    "heterogeneous sources through one global schema.",
)


@app.exception_handler(ParseError)
async def parse_error_handler(_, exc: ParseError) -> JSONResponse:
    return JSONResponse(
        status_code=400,
        content={
            "detail": str(exc),
            "diagnostics": [
                {
                    "file": d.file,
                    "line": d.line,
                    "column": d.column,
                    "message": d.message,
                    "severity": d.severity.value,
                }
                for d in exc.diagnostics
            ],
        },
    )


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail=str(exc))


def _report_model(report) -> ReportModel:
    return ReportModel(**json.loads(docio.serialize_report(report)))


def _alignment_models(alignments) -> list[AlignmentModel]:
    return [AlignmentModel(**docio.alignment_payload(a)) for a in alignments]


def _parse_alignment_models(models: list[AlignmentModel]):
    return [
        docio.parse_alignment(m.model_dump_json(), file="<request>") for m in models
    ]


@app.get("/health")
def health() -> dict:
    return {"status": "ok", "version": __version__}


@app.post("/lint", response_model=ReportModel)
def lint_endpoint(request: LintRequest) -> ReportModel:
    ontology = docio.parse_ontology(request.ontology, file="<request>")
    report = lint(ontology, chain_length=request.chain_length, clump_size=request.clump_size)
    return _report_model(report)


@app.post("/align", response_model=AlignmentModel)
def align_endpoint(request: AlignRequest) -> AlignmentModel:
    o1 = docio.parse_ontology(request.onto1, file="<onto1>")
    o2 = docio.parse_ontology(request.onto2, file="<onto2>")
    try:
        alignment = compute_alignment(o1, o2, request.theta)
    except AlignmentError as exc:
        raise _bad_request(exc) from exc
    return _alignment_models([alignment])[0]


@app.post("/merge", response_model=MergeResponse)
def merge_endpoint(request: MergeRequest) -> MergeResponse:
    sources = [
        docio.parse_ontology(text, file=f"<source {k}>")
        for k, text in enumerate(request.sources)
    ]
    try:
        if request.alignments is None:
            alignments = [
                compute_alignment(sources[i], sources[j], request.theta)
                for i in range(len(sources))
                for j in range(i + 1, len(sources))
            ]
        else:
            alignments = _parse_alignment_models(request.alignments)
        thresholds = {
            "similarity": request.theta,
            "locality": request.tau,
            "chain_length": request.chain_length,
            "clump_size": request.clump_size,
        }
        merged, repaired, removed = build_global(
            sources, alignments, thresholds, repair=request.repair
        )
    except (MergeError, AlignmentError, OntologyError) as exc:
        raise _bad_request(exc) from exc
    report = lint_global(merged, thresholds)
    provenance = json.loads(docio.serialize_provenance(merged))
    return MergeResponse(
        merged=docio.serialize_ontology(merged.global_ontology),
        provenance=provenance,
        report=_report_model(report),
        alignments=_alignment_models(repaired),
        removed=[
            {
                "onto1": r.onto1.rendered,
                "onto2": r.onto2.rendered,
                "e1": r.correspondence.e1.rendered,
                "e2": r.correspondence.e2.rendered,
                "rel": r.correspondence.rel.value,
                "conf": r.correspondence.conf,
            }
            for r in removed
        ],
    )


@app.post("/query", response_model=AnswerSetModel)
def query_endpoint(request: QueryRequest) -> AnswerSetModel:
    global_ontology = docio.parse_ontology(request.merged, file="<merged>")
    merged = docio.parse_provenance(
        json.dumps(request.provenance), global_ontology, file="<provenance>"
    )
    query = docio.parse_query(request.query, query_id=request.query_id, file="<query>")
    documents = [(text, f"<abox {k}>") for k, text in enumerate(request.aboxes)]
    try:
        stores = stores_from_abox_documents(merged, documents)
        answers = answer_query(query, merged, stores)
    except (MediationError, MergeError, PipelineError) as exc:
        raise _bad_request(exc) from exc
    return AnswerSetModel(**json.loads(docio.serialize_answer_set(answers)))


@app.post("/eval", response_model=EvaluationModel)
def eval_endpoint(request: EvalRequest) -> EvaluationModel:
    ontologies = []
    stores = []
    for k, source in enumerate(request.sources):
        onto = docio.parse_ontology(source.ontology, file=f"<source {k}>")
        kinds = {e.iri: e.kind for e in onto.entities}
        assertions = []
        for j, abox_text in enumerate(source.aboxes):
            abox = docio.parse_abox(abox_text, kinds, file=f"<source {k} abox {j}>")
            if abox.source != onto.id:
                raise _bad_request(
                    ValueError(f"abox {j} declares {abox.source}, expected {onto.id}")
                )
            assertions.extend(abox.assertions)
        try:
            stores.append(build_store(onto, assertions))
        except MediationError as exc:
            raise _bad_request(exc) from exc
        ontologies.append(onto)
    thresholds = request.thresholds.model_dump()
    try:
        if request.alignments is None:
            alignments = [
                compute_alignment(ontologies[i], ontologies[j], thresholds["similarity"])
                for i in range(len(ontologies))
                for j in range(i + 1, len(ontologies))
            ]
        else:
            alignments = _parse_alignment_models(request.alignments)
        merged, _, _ = build_global(ontologies, alignments, thresholds)
    except (MergeError, AlignmentError, OntologyError) as exc:
        raise _bad_request(exc) from exc
    queries = [
        docio.parse_query(doc.text, query_id=doc.id, file=f"<query {doc.id}>")
        for doc in request.queries
    ]
    answers, answered = answer_all(queries, merged, stores)
    references = docio.parse_reference_answers(
        json.dumps(request.references), file="<references>"
    )
    try:
        evaluation = evaluate_answers(answers, answered, references)
    except Exception as exc:
        raise _bad_request(exc) from exc
    return EvaluationModel(
        answered=evaluation.answered_count,
        total=evaluation.total_queries,
        avgPrecision=round_half_up(evaluation.avg_precision, 4),
        avgRecall=round_half_up(evaluation.avg_recall, 4),
        avgFmeasure=round_half_up(evaluation.avg_fmeasure, 4),
        hFmeasure=round_half_up(evaluation.h_fmeasure, 4),
        perQuery=[
            {
                "queryId": s.query_id,
                "answered": s.answered,
                "precision": round_half_up(s.precision, 4),
                "recall": round_half_up(s.recall, 4),
                "fmeasure": round_half_up(s.fmeasure, 4),
            }
            for s in evaluation.per_query
        ],
    )
