"""Manifest-driven runs: parse, align, repair, merge, lint, answer, score.

Every stage failure is wrapped in a PipelineError naming the stage, so
front ends can report where a run died and map it to an exit code.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from . import docio
from .align import (
    Alignment,
    AlignmentError,
    RemovedCorrespondence,
    compute_alignment,
    repair_alignment,
)
from .docio import Manifest, ParseError
from .evaluate import EvaluationResult, aggregate, score_query
from .mediate import (
    AnswerSet,
    ConjunctiveQuery,
    MediationError,
    SourceStore,
    UnanswerableQueryError,
    answer_query,
    build_store,
)
from .merge import MergedOntology, MergeError, merge
from .model import (
    ClassAssertion,
    EntityKind,
    Iri,
    Ontology,
    OntologyError,
    PropertyAssertion,
)
from .quality import QualityReport, RepairPreconditionError, lint, repair_redundancies


class PipelineError(Exception):
    def __init__(self, stage: str, message: str):
        self.stage = stage
        super().__init__(f"[{stage}] {message}")


class StrictQualityError(Exception):
    """Error-severity findings survived linting under strict mode."""

    def __init__(self, report: QualityReport):
        self.report = report
        names = ", ".join(sorted({f.category.value for f in report.errors()}))
        super().__init__(f"quality gate failed: {names}")


@dataclass
class PipelineResult:
    sources: list[Ontology]
    alignments: list[Alignment]
    removed: list[RemovedCorrespondence]
    merged: MergedOntology
    report: QualityReport
    answers: dict[str, AnswerSet] = field(default_factory=dict)
    answered: dict[str, bool] = field(default_factory=dict)
    evaluation: EvaluationResult | None = None


def _read(path: Path, stage: str) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except OSError as exc:
        raise PipelineError(stage, f"cannot read {path}: {exc.strerror or exc}") from exc


def _guard(stage: str, exc: Exception) -> PipelineError:
    return PipelineError(stage, str(exc))


def load_sources(manifest: Manifest, base: Path) -> list[tuple[Ontology, SourceStore]]:
    sources = []
    for entry in manifest.sources:
        path = base / entry.ontology
        try:
            onto = docio.parse_ontology(_read(path, "parse-sources"), file=str(path))
        except (ParseError, OntologyError) as exc:
            raise _guard("parse-sources", exc) from exc
        kinds = {e.iri: e.kind for e in onto.entities}
        assertions = []
        for abox_rel in entry.aboxes:
            abox_path = base / abox_rel
            try:
                abox = docio.parse_abox(
                    _read(abox_path, "parse-sources"), kinds, file=str(abox_path)
                )
            except (ParseError, OntologyError) as exc:
                raise _guard("parse-sources", exc) from exc
            if abox.source != onto.id:
                raise PipelineError(
                    "parse-sources",
                    f"{abox_path} declares namespace of {abox.source}, expected {onto.id}",
                )
            assertions.extend(abox.assertions)
        try:
            store = build_store(onto, assertions)
        except MediationError as exc:
            raise _guard("parse-sources", exc) from exc
        sources.append((onto, store))
    return sources


def obtain_alignments(
    manifest: Manifest, ontologies: Sequence[Ontology], base: Path
) -> list[Alignment]:
    """Load alignment files when given; otherwise compute all source pairs."""
    if manifest.alignments:
        alignments = []
        for rel in manifest.alignments:
            path = base / rel
            try:
                alignments.append(
                    docio.parse_alignment(_read(path, "align"), file=str(path))
                )
            except ParseError as exc:
                raise _guard("align", exc) from exc
        return alignments
    theta = manifest.thresholds["similarity"]
    alignments = []
    try:
        for i in range(len(ontologies)):
            for j in range(i + 1, len(ontologies)):
                alignments.append(compute_alignment(ontologies[i], ontologies[j], theta))
    except AlignmentError as exc:
        raise _guard("align", exc) from exc
    return alignments


def load_queries(manifest: Manifest, base: Path) -> list[ConjunctiveQuery]:
    paths: list[Path] = []
    for rel in manifest.queries:
        path = base / rel
        if path.is_dir():
            paths.extend(sorted(p for p in path.iterdir() if p.is_file()))
        else:
            paths.append(path)
    queries = []
    for path in paths:
        try:
            queries.append(
                docio.parse_query(_read(path, "parse-queries"), query_id=path.stem, file=str(path))
            )
        except ParseError as exc:
            raise _guard("parse-queries", exc) from exc
    return queries


_DEFAULT_PREFIX_LINE = re.compile(r"^\s*@prefix\s+:\s+<([^>]*)>\s+\.", re.MULTILINE)


def stores_from_abox_documents(
    merged: MergedOntology, documents: Sequence[tuple[str, str]]
) -> list[SourceStore]:
    """One store per merged source from loose ABox documents.

    Each (text, file label) document is attributed to a source by its
    declared default namespace and validated against that source's
    declarations as recorded in the provenance map.
    """
    kinds_by_source: dict[Iri, dict[Iri, EntityKind]] = {
        src: {} for src in merged.sources()
    }
    for global_iri, refs in merged.provenance.items():
        kind = merged.global_ontology.kind_of(global_iri)
        assert kind is not None
        for src, local in refs:
            kinds_by_source[src][local] = kind
    by_source: dict[Iri, set] = {src: set() for src in merged.sources()}
    for text, label in documents:
        match = _DEFAULT_PREFIX_LINE.search(text)
        declared_ns = match.group(1) if match else docio.DEFAULT_DOC_NS
        source = None
        if declared_ns.endswith(("#", "/")):
            try:
                source = Iri.parse(declared_ns[:-1])
            except OntologyError:
                source = None
        if source is None or source not in by_source:
            raise PipelineError(
                "parse-abox", f"{label} does not match any merged source namespace"
            )
        abox = docio.parse_abox(text, kinds_by_source[source], file=label)
        by_source[source].update(abox.assertions)
    stores = []
    for src in merged.sources():
        class_assertions = set()
        property_assertions = set()
        for ax in by_source[src]:
            if isinstance(ax, ClassAssertion):
                class_assertions.add((ax.individual, ax.cls))
            elif isinstance(ax, PropertyAssertion):
                property_assertions.add((ax.subject, ax.prop, ax.object))
        stores.append(
            SourceStore(src, frozenset(class_assertions), frozenset(property_assertions))
        )
    return stores


def build_global(
    sources: Sequence[Ontology],
    alignments: Sequence[Alignment],
    thresholds,
    repair: bool = True,
) -> tuple[MergedOntology, list[Alignment], list[RemovedCorrespondence]]:
    try:
        if repair:
            repaired, removed = repair_alignment(
                sources, alignments, tau=thresholds["locality"]
            )
        else:
            repaired, removed = list(alignments), []
        merged = merge(sources, repaired)
    except (MergeError, AlignmentError) as exc:
        raise _guard("merge", exc) from exc
    if repair:
        try:
            reduced, _ = repair_redundancies(merged.global_ontology)
            merged = MergedOntology(reduced, merged.provenance, merged.source_ids)
        except RepairPreconditionError:
            pass  # cyclic hierarchy; lint will carry the circulatory errors
    return merged, repaired, removed


def lint_global(merged: MergedOntology, thresholds) -> QualityReport:
    return lint(
        merged.global_ontology,
        chain_length=int(thresholds["chain_length"]),
        clump_size=int(thresholds["clump_size"]),
    )


def answer_all(
    queries: Sequence[ConjunctiveQuery],
    merged: MergedOntology,
    stores: Sequence[SourceStore],
) -> tuple[dict[str, AnswerSet], dict[str, bool]]:
    """Answer every query; vocabulary errors and unsatisfiable query classes
    mark a query unanswered instead of failing the run."""
    answers: dict[str, AnswerSet] = {}
    answered: dict[str, bool] = {}
    for query in queries:
        try:
            answers[query.id] = answer_query(query, merged, stores)
            answered[query.id] = True
        except (UnanswerableQueryError, MediationError):
            answers[query.id] = AnswerSet(query.id, frozenset())
            answered[query.id] = False
    return answers, answered


def evaluate_answers(
    answers: dict[str, AnswerSet],
    answered: dict[str, bool],
    references: dict[str, AnswerSet],
) -> EvaluationResult:
    scores = []
    for query_id in sorted(answers):
        reference = references.get(query_id, AnswerSet(query_id, frozenset()))
        scores.append(score_query(answers[query_id], reference, answered[query_id]))
    return aggregate(scores)


def write_global_artifacts(
    out: Path,
    merged: MergedOntology,
    report: QualityReport,
    alignments: Sequence[Alignment],
    removed: Sequence[RemovedCorrespondence],
) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "merged.ttl").write_text(
            docio.serialize_ontology(merged.global_ontology), encoding="utf-8"
        )
        (out / "provenance.json").write_text(docio.serialize_provenance(merged), encoding="utf-8")
        (out / "report.json").write_text(docio.serialize_report(report), encoding="utf-8")
        (out / "alignments.json").write_text(
            docio.serialize_alignment_list(alignments), encoding="utf-8"
        )
        (out / "removals.json").write_text(docio.serialize_removals(removed), encoding="utf-8")
    except OSError as exc:
        raise PipelineError("write-artifacts", str(exc)) from exc


def run_pipeline(
    manifest: Manifest,
    base: Path,
    out: Path | None,
    strict: bool = False,
    repair: bool = True,
) -> PipelineResult:
    """The full run; `out=None` skips writing artifacts."""
    loaded = load_sources(manifest, base)
    ontologies = [onto for onto, _ in loaded]
    stores = [store for _, store in loaded]
    alignments = obtain_alignments(manifest, ontologies, base)
    merged, repaired, removed = build_global(
        ontologies, alignments, manifest.thresholds, repair
    )
    report = lint_global(merged, manifest.thresholds)
    result = PipelineResult(ontologies, repaired, removed, merged, report)
    if out is not None:
        write_global_artifacts(out, merged, report, repaired, removed)
    if strict and report.errors():
        raise StrictQualityError(report)

    queries = load_queries(manifest, base)
    result.answers, result.answered = answer_all(queries, merged, stores)
    if out is not None and queries:
        answers_dir = out / "answers"
        try:
            answers_dir.mkdir(parents=True, exist_ok=True)
            for query_id, answers in sorted(result.answers.items()):
                (answers_dir / f"{query_id}.json").write_text(
                    docio.serialize_answer_set(answers), encoding="utf-8"
                )
        except OSError as exc:
            raise PipelineError("write-artifacts", str(exc)) from exc

    if manifest.references is not None:
        ref_path = base / manifest.references
        try:
            references = docio.parse_reference_answers(
                _read(ref_path, "evaluate"), file=str(ref_path)
            )
        except ParseError as exc:
            raise _guard("evaluate", exc) from exc
        if result.answers:
            result.evaluation = evaluate_answers(result.answers, result.answered, references)
            if out is not None:
                try:
                    (out / "evaluation.json").write_text(
                        docio.serialize_evaluation(result.evaluation), encoding="utf-8"
                    )
                except OSError as exc:
                    raise PipelineError("write-artifacts", str(exc)) from exc
    return result
