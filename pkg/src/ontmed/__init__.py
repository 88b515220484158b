"""Ontology mediation engine.

Merges heterogeneous local ontologies into one quality-checked global
ontology and answers conjunctive queries posed in global vocabulary by
rewriting them onto the sources and merging the results.

Typical flow: parse sources (`docio`), compute and validate alignments
(`align`), build the global ontology (`merge`), lint it (`quality`),
answer queries (`mediate`), and score against references (`evaluate`).
`pipeline.run_pipeline` drives the whole chain from a manifest; `cli`
and `service.app` are the command-line and HTTP front ends.
"""

from .align import (
    Alignment,
    Correspondence,
    Principle,
    PrincipleViolation,
    Relation,
    check_consistency_principle,
    check_conservativity_principle,
    check_locality_principle,
    compute_alignment,
    repair_alignment,
)
from .evaluate import EvaluationResult, QueryScore, aggregate, score_query
from .mediate import (
    AnswerSet,
    ClassAtom,
    ConjunctiveQuery,
    PropertyAtom,
    SourceStore,
    Variable,
    answer_query,
    build_store,
    evaluate_local,
    expand_query,
    rewrite_for_source,
)
from .merge import MergedOntology, merge, project_closure
from .model import (
    Axiom,
    ClassAssertion,
    DisjointClasses,
    Domain,
    Entity,
    EntityKind,
    EquivalentClasses,
    Iri,
    Ontology,
    OntologyError,
    PropertyAssertion,
    Range,
    SubClassOf,
    SubPropertyOf,
    disjointness_closure,
    signature,
    subproperty_closure,
    subsumption_closure,
    unsatisfiable_classes,
)
from .pipeline import PipelineResult, run_pipeline
from .quality import (
    Category,
    Finding,
    QualityReport,
    Severity,
    lint,
    repair_redundancies,
)

__version__ = "0.1.0"

__all__ = [
    "Alignment",
    "AnswerSet",
    "Axiom",
    "Category",
    "ClassAssertion",
    "ClassAtom",
    "ConjunctiveQuery",
    "Correspondence",
    "DisjointClasses",
    "Domain",
    "Entity",
    "EntityKind",
    "EquivalentClasses",
    "EvaluationResult",
    "Finding",
    "Iri",
    "MergedOntology",
    "Ontology",
    "OntologyError",
    "PipelineResult",
    "Principle",
    "PrincipleViolation",
    "PropertyAssertion",
    "PropertyAtom",
    "QualityReport",
    "QueryScore",
    "Range",
    "Relation",
    "Severity",
    "SourceStore",
    "SubClassOf",
    "SubPropertyOf",
    "Variable",
    "aggregate",
    "answer_query",
    "build_store",
    "check_consistency_principle",
    "check_conservativity_principle",
    "check_locality_principle",
    "compute_alignment",
    "disjointness_closure",
    "evaluate_local",
    "expand_query",
    "lint",
    "merge",
    "project_closure",
    "repair_alignment",
    "repair_redundancies",
    "rewrite_for_source",
    "run_pipeline",
    "score_query",
    "signature",
    "subproperty_closure",
    "subsumption_closure",
    "unsatisfiable_classes",
]
