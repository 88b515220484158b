"""JSON document formats: alignments, manifests, reference answers, quality
reports, answer sets, provenance sidecars, removal logs, and evaluation
results. All serializers are canonical (sorted keys, two-space indent,
trailing newline) so equal values yield byte-identical documents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from ontmed.align import Alignment, AlignmentError, Correspondence, Relation, RemovedCorrespondence
from ontmed.evaluate import EvaluationResult, QueryScore
from ontmed.mediate import AnswerSet
from ontmed.merge import MergedOntology
from ontmed.model import Iri, Ontology, OntologyError
from ontmed.quality import Category, Finding, QualityReport

from .diagnostics import ParseDiagnostic, ParseError, fail

DEFAULT_THRESHOLDS = {
    "similarity": 0.85,
    "locality": 0.5,
    "chain_length": 3,
    "clump_size": 3,
}


def _dump(payload: Any) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def _load(text: str, file: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(
            [ParseDiagnostic(file, exc.lineno, exc.colno, f"malformed JSON: {exc.msg}")]
        ) from None


def _parse_iri(rendered: Any, file: str, context: str) -> Iri:
    if not isinstance(rendered, str):
        raise fail(file, 1, 1, f"{context}: expected an IRI string, got {rendered!r}")
    try:
        return Iri.parse(rendered)
    except OntologyError as exc:
        raise fail(file, 1, 1, f"{context}: {exc}") from None


# ------------------------------------------------------------- alignments

def parse_alignment(text: str, file: str = "<string>") -> Alignment:
    data = _load(text, file)
    if not isinstance(data, dict):
        raise fail(file, 1, 1, "alignment document must be a JSON object")
    for key in ("onto1", "onto2", "correspondences"):
        if key not in data:
            raise fail(file, 1, 1, f"alignment document missing key {key!r}")
    onto1 = _parse_iri(data["onto1"], file, "onto1")
    onto2 = _parse_iri(data["onto2"], file, "onto2")
    if not isinstance(data["correspondences"], list):
        raise fail(file, 1, 1, "'correspondences' must be a list")
    corrs = []
    for k, item in enumerate(data["correspondences"]):
        context = f"correspondences[{k}]"
        if not isinstance(item, dict):
            raise fail(file, 1, 1, f"{context}: expected an object")
        for key in ("e1", "e2", "rel", "conf"):
            if key not in item:
                raise fail(file, 1, 1, f"{context}: missing key {key!r}")
        try:
            rel = Relation(item["rel"])
        except ValueError:
            raise fail(file, 1, 1, f"{context}: unknown relation token {item['rel']!r}") from None
        conf = item["conf"]
        if not isinstance(conf, (int, float)) or isinstance(conf, bool) or not 0 <= conf <= 1:
            raise fail(file, 1, 1, f"{context}: confidence must be within [0,1], got {conf!r}")
        corrs.append(
            Correspondence(
                _parse_iri(item["e1"], file, context),
                _parse_iri(item["e2"], file, context),
                rel,
                float(conf),
            )
        )
    try:
        return Alignment(onto1, onto2, tuple(corrs))
    except AlignmentError as exc:
        raise fail(file, 1, 1, str(exc)) from None


def alignment_payload(alignment: Alignment) -> dict:
    return {
        "onto1": alignment.onto1.rendered,
        "onto2": alignment.onto2.rendered,
        "correspondences": [
            {"e1": c.e1.rendered, "e2": c.e2.rendered, "rel": c.rel.value, "conf": c.conf}
            for c in alignment.correspondences
        ],
    }


def serialize_alignment(alignment: Alignment) -> str:
    return _dump(alignment_payload(alignment))


def parse_alignment_list(text: str, file: str = "<string>") -> list[Alignment]:
    data = _load(text, file)
    if not isinstance(data, list):
        raise fail(file, 1, 1, "expected a JSON array of alignment objects")
    return [parse_alignment(json.dumps(item), file) for item in data]


def serialize_alignment_list(alignments: Sequence[Alignment]) -> str:
    return _dump([alignment_payload(a) for a in alignments])


def serialize_removals(removed: Sequence[RemovedCorrespondence]) -> str:
    return _dump(
        [
            {
                "onto1": r.onto1.rendered,
                "onto2": r.onto2.rendered,
                "e1": r.correspondence.e1.rendered,
                "e2": r.correspondence.e2.rendered,
                "rel": r.correspondence.rel.value,
                "conf": r.correspondence.conf,
            }
            for r in removed
        ]
    )


# ---------------------------------------------------------------- manifest

@dataclass(frozen=True)
class ManifestSource:
    ontology: str
    aboxes: tuple[str, ...] = ()


@dataclass(frozen=True)
class Manifest:
    sources: tuple[ManifestSource, ...]
    alignments: tuple[str, ...] = ()
    queries: tuple[str, ...] = ()
    references: str | None = None
    thresholds: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_THRESHOLDS))

    def __post_init__(self) -> None:
        if not self.sources:
            raise ValueError("manifest requires at least one source")
        t = dict(DEFAULT_THRESHOLDS)
        t.update(self.thresholds)
        if not 0 <= t["similarity"] <= 1:
            raise ValueError("similarity threshold must be within [0,1]")
        if not 0 <= t["locality"] <= 1:
            raise ValueError("locality threshold must be within [0,1]")
        if t["chain_length"] < 2 or t["clump_size"] < 2:
            raise ValueError("chain_length and clump_size must be at least 2")
        object.__setattr__(self, "thresholds", t)

    def without_queries(self) -> "Manifest":
        """The same run cut off after the merge/lint stages."""
        return Manifest(self.sources, self.alignments, (), None, self.thresholds)


def parse_manifest(text: str, file: str = "<string>") -> Manifest:
    data = _load(text, file)
    if not isinstance(data, dict):
        raise fail(file, 1, 1, "manifest must be a JSON object")
    if "sources" not in data:
        raise fail(file, 1, 1, "manifest missing key 'sources'")
    raw_sources = data["sources"]
    if not isinstance(raw_sources, list) or not raw_sources:
        raise fail(file, 1, 1, "'sources' must be a non-empty list")
    sources = []
    for k, item in enumerate(raw_sources):
        if not isinstance(item, dict) or "ontology" not in item:
            raise fail(file, 1, 1, f"sources[{k}] must be an object with an 'ontology' key")
        aboxes = item.get("aboxes", [])
        if not isinstance(aboxes, list) or not all(isinstance(p, str) for p in aboxes):
            raise fail(file, 1, 1, f"sources[{k}].aboxes must be a list of paths")
        sources.append(ManifestSource(item["ontology"], tuple(aboxes)))
    alignments = data.get("alignments", [])
    if not isinstance(alignments, list) or not all(isinstance(p, str) for p in alignments):
        raise fail(file, 1, 1, "'alignments' must be a list of paths")
    queries = data.get("queries", [])
    if isinstance(queries, str):
        queries = [queries]
    if not isinstance(queries, list) or not all(isinstance(p, str) for p in queries):
        raise fail(file, 1, 1, "'queries' must be a path or a list of paths")
    references = data.get("references")
    if references is not None and not isinstance(references, str):
        raise fail(file, 1, 1, "'references' must be a path")
    thresholds = data.get("thresholds", {})
    if not isinstance(thresholds, dict):
        raise fail(file, 1, 1, "'thresholds' must be an object")
    unknown = set(thresholds) - set(DEFAULT_THRESHOLDS)
    if unknown:
        raise fail(file, 1, 1, f"unknown threshold keys: {sorted(unknown)}")
    try:
        return Manifest(
            tuple(sources), tuple(alignments), tuple(queries), references, thresholds
        )
    except ValueError as exc:
        raise fail(file, 1, 1, str(exc)) from None


def serialize_manifest(manifest: Manifest) -> str:
    payload: dict[str, Any] = {
        "sources": [
            {"ontology": s.ontology, "aboxes": list(s.aboxes)} for s in manifest.sources
        ],
        "alignments": list(manifest.alignments),
        "queries": list(manifest.queries),
        "references": manifest.references,
        "thresholds": dict(manifest.thresholds),
    }
    return _dump(payload)


# ---------------------------------------------------- reference answer sets

def parse_reference_answers(text: str, file: str = "<string>") -> dict[str, AnswerSet]:
    data = _load(text, file)
    if not isinstance(data, dict):
        raise fail(file, 1, 1, "reference answers must be a JSON object keyed by query id")
    out: dict[str, AnswerSet] = {}
    for query_id, rows in data.items():
        if not isinstance(rows, list):
            raise fail(file, 1, 1, f"{query_id}: expected a list of binding tuples")
        tuples = set()
        for row in rows:
            if not isinstance(row, list) or not all(isinstance(v, str) for v in row):
                raise fail(file, 1, 1, f"{query_id}: each binding tuple must be a list of IRIs")
            tuples.add(tuple(_parse_iri(v, file, query_id) for v in row))
        out[query_id] = AnswerSet(query_id, frozenset(tuples))
    return out


def serialize_reference_answers(references: Mapping[str, AnswerSet]) -> str:
    payload = {
        query_id: [[iri.rendered for iri in row] for row in answers.sorted_tuples()]
        for query_id, answers in references.items()
    }
    return _dump(payload)


# -------------------------------------------------------------- answer sets

def parse_answer_set(text: str, file: str = "<string>") -> AnswerSet:
    data = _load(text, file)
    if not isinstance(data, dict) or "queryId" not in data or "tuples" not in data:
        raise fail(file, 1, 1, "answer set must be an object with 'queryId' and 'tuples'")
    tuples = set()
    for row in data["tuples"]:
        if not isinstance(row, list) or not all(isinstance(v, str) for v in row):
            raise fail(file, 1, 1, "each binding tuple must be a list of IRIs")
        tuples.add(tuple(_parse_iri(v, file, data["queryId"]) for v in row))
    return AnswerSet(str(data["queryId"]), frozenset(tuples))


def serialize_answer_set(answers: AnswerSet) -> str:
    payload = {
        "queryId": answers.query_id,
        "tuples": [[iri.rendered for iri in row] for row in answers.sorted_tuples()],
    }
    return _dump(payload)


# ------------------------------------------------------------ quality report

def parse_report(text: str, file: str = "<string>") -> QualityReport:
    data = _load(text, file)
    if not isinstance(data, dict) or "target" not in data or "findings" not in data:
        raise fail(file, 1, 1, "report must be an object with 'target' and 'findings'")
    findings = []
    for k, item in enumerate(data["findings"]):
        context = f"findings[{k}]"
        try:
            category = Category(item["category"])
        except (KeyError, ValueError):
            raise fail(file, 1, 1, f"{context}: unknown category") from None
        entities = tuple(_parse_iri(e, file, context) for e in item.get("entities", []))
        finding = Finding(category, entities, str(item.get("explanation", "")))
        if item.get("severity") != finding.severity.value:
            raise fail(
                file, 1, 1,
                f"{context}: severity {item.get('severity')!r} does not match "
                f"category {category.value}",
            )
        findings.append(finding)
    return QualityReport(_parse_iri(data["target"], file, "target"), tuple(findings))


def serialize_report(report: QualityReport) -> str:
    payload = {
        "target": report.target.rendered,
        "findings": [
            {
                "category": f.category.value,
                "severity": f.severity.value,
                "entities": [i.rendered for i in f.entities],
                "explanation": f.explanation,
            }
            for f in report.findings
        ],
        "counts": report.counts(),
    }
    return _dump(payload)


# -------------------------------------------------------------- provenance

def serialize_provenance(merged: MergedOntology) -> str:
    payload = {
        global_iri.rendered: sorted(
            [src.rendered, local.rendered] for src, local in refs
        )
        for global_iri, refs in merged.provenance.items()
    }
    return _dump(payload)


def parse_provenance(
    text: str, global_ontology: Ontology, file: str = "<string>"
) -> MergedOntology:
    """Rebuild a MergedOntology from a serialized global ontology + sidecar."""
    data = _load(text, file)
    if not isinstance(data, dict):
        raise fail(file, 1, 1, "provenance sidecar must be a JSON object")
    provenance: dict[Iri, frozenset] = {}
    for rendered, refs in data.items():
        global_iri = _parse_iri(rendered, file, "provenance key")
        if global_ontology.kind_of(global_iri) is None:
            raise fail(file, 1, 1, f"provenance names {rendered}, not in the merged ontology")
        pairs = set()
        for ref in refs:
            if not isinstance(ref, list) or len(ref) != 2:
                raise fail(file, 1, 1, f"provenance of {rendered} must hold [source, local] pairs")
            pairs.add(
                (_parse_iri(ref[0], file, rendered), _parse_iri(ref[1], file, rendered))
            )
        provenance[global_iri] = frozenset(pairs)
    missing = set(e.iri for e in global_ontology.entities) - set(provenance)
    if missing:
        raise fail(file, 1, 1, f"provenance missing entries for {sorted(missing)[0]}")
    return MergedOntology(global_ontology, provenance)


# --------------------------------------------------------------- evaluation

def _fixed(value: float) -> str:
    return f"{value:.4f}"


def serialize_evaluation(result: EvaluationResult) -> str:
    """Fixed-schema writer so reals render with exactly four decimals."""
    lines = ["{"]
    lines.append(f'  "answered": {result.answered_count},')
    lines.append(f'  "total": {result.total_queries},')
    lines.append(f'  "avgPrecision": {_fixed(result.avg_precision)},')
    lines.append(f'  "avgRecall": {_fixed(result.avg_recall)},')
    lines.append(f'  "avgFmeasure": {_fixed(result.avg_fmeasure)},')
    lines.append(f'  "hFmeasure": {_fixed(result.h_fmeasure)},')
    lines.append('  "perQuery": [')
    for k, score in enumerate(result.per_query):
        comma = "," if k < len(result.per_query) - 1 else ""
        lines.append(
            "    {"
            + f'"queryId": {json.dumps(score.query_id)}, '
            + f'"answered": {json.dumps(score.answered)}, '
            + f'"precision": {_fixed(score.precision)}, '
            + f'"recall": {_fixed(score.recall)}, '
            + f'"fmeasure": {_fixed(score.fmeasure)}'
            + "}"
            + comma
        )
    lines.append("  ]")
    lines.append("}")
    return "\n".join(lines) + "\n"


def parse_evaluation(text: str, file: str = "<string>") -> EvaluationResult:
    data = _load(text, file)
    required = {"answered", "total", "avgPrecision", "avgRecall", "avgFmeasure", "perQuery"}
    if not isinstance(data, dict) or not required <= set(data):
        raise fail(file, 1, 1, "evaluation document missing required keys")
    per_query = tuple(
        QueryScore(
            str(item["queryId"]),
            bool(item["answered"]),
            float(item["precision"]),
            float(item["recall"]),
            float(item["fmeasure"]),
        )
        for item in data["perQuery"]
    )
    return EvaluationResult(
        per_query=per_query,
        answered_count=int(data["answered"]),
        total_queries=int(data["total"]),
        avg_precision=float(data["avgPrecision"]),
        avg_recall=float(data["avgRecall"]),
        avg_fmeasure=float(data["avgFmeasure"]),
        h_fmeasure=float(data.get("hFmeasure", 0.0)),
    )
