"""Parsing and serialization of every on-disk artifact."""

from .diagnostics import ParseDiagnostic, ParseError, Severity
from .jsonio import (
    DEFAULT_THRESHOLDS,
    Manifest,
    ManifestSource,
    alignment_payload,
    parse_alignment,
    parse_alignment_list,
    parse_answer_set,
    parse_evaluation,
    parse_manifest,
    parse_provenance,
    parse_reference_answers,
    parse_report,
    serialize_alignment,
    serialize_alignment_list,
    serialize_answer_set,
    serialize_evaluation,
    serialize_manifest,
    serialize_provenance,
    serialize_reference_answers,
    serialize_removals,
    serialize_report,
)
from .queries import parse_query, serialize_query
from .turtle import (
    DEFAULT_DOC_NS,
    AboxDocument,
    parse_abox,
    parse_ontology,
    serialize_abox,
    serialize_ontology,
)

__all__ = [
    "AboxDocument",
    "DEFAULT_DOC_NS",
    "DEFAULT_THRESHOLDS",
    "Manifest",
    "ManifestSource",
    "ParseDiagnostic",
    "ParseError",
    "Severity",
    "alignment_payload",
    "parse_abox",
    "parse_alignment",
    "parse_alignment_list",
    "parse_answer_set",
    "parse_evaluation",
    "parse_manifest",
    "parse_ontology",
    "parse_provenance",
    "parse_query",
    "parse_reference_answers",
    "parse_report",
    "serialize_abox",
    "serialize_alignment",
    "serialize_alignment_list",
    "serialize_answer_set",
    "serialize_evaluation",
    "serialize_manifest",
    "serialize_ontology",
    "serialize_provenance",
    "serialize_query",
    "serialize_reference_answers",
    "serialize_removals",
    "serialize_report",
]
