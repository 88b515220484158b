"""Turtle-subset reader and writer for ontology and ABox documents.

Grammar, one statement per line:

    @prefix pre: <http://absolute/uri#> .
    <subject> <predicate> <object> .

Terms are prefixed names (``:A``, ``rdf:type``) or full IRIs in angle
brackets. Recognized predicates: ``rdf:type`` (with ``owl:Class``,
``owl:ObjectProperty``, ``owl:NamedIndividual``, or a declared class as
object), ``rdfs:subClassOf``, ``owl:equivalentClass``, ``owl:disjointWith``,
``rdfs:subPropertyOf``, ``rdfs:domain``, ``rdfs:range``, ``rdfs:label``
(string literal), and any declared object property (property assertion).
``#`` starts a comment. Declarations may appear in any order; references
are resolved in a second pass.

The empty prefix identifies the ontology: its namespace minus the trailing
separator is the ontology id. ``rdf:``, ``rdfs:``, ``owl:`` and a fallback
empty prefix are predeclared.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

from ontmed.model import (
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
    axiom_sort_key,
)

from .diagnostics import ParseDiagnostic, ParseError

RDF_NS = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS_NS = "http://www.w3.org/2000/01/rdf-schema#"
OWL_NS = "http://www.w3.org/2002/07/owl#"
DEFAULT_DOC_NS = "http://ontmed.local/doc#"

_BUILTIN_PREFIXES = {"rdf": RDF_NS, "rdfs": RDFS_NS, "owl": OWL_NS, "": DEFAULT_DOC_NS}

_RDF_TYPE = RDF_NS + "type"
_RDFS_SUBCLASS = RDFS_NS + "subClassOf"
_RDFS_SUBPROP = RDFS_NS + "subPropertyOf"
_RDFS_DOMAIN = RDFS_NS + "domain"
_RDFS_RANGE = RDFS_NS + "range"
_RDFS_LABEL = RDFS_NS + "label"
_OWL_EQUIV = OWL_NS + "equivalentClass"
_OWL_DISJOINT = OWL_NS + "disjointWith"

_KIND_BY_TYPE_OBJECT = {
    OWL_NS + "Class": EntityKind.CLASS,
    OWL_NS + "ObjectProperty": EntityKind.OBJECT_PROPERTY,
    OWL_NS + "NamedIndividual": EntityKind.INDIVIDUAL,
}

_PNAME_RE = re.compile(r"^([A-Za-z][A-Za-z0-9_\-]*)?:([A-Za-z_][A-Za-z0-9_\-]*)$")
_SAFE_LOCAL_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_\-]*$")


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    column: int
    is_literal: bool = False
    is_iri: bool = False


def _tokenize_line(text: str, lineno: int, file: str, diags: list[ParseDiagnostic]) -> list[_Token]:
    tokens: list[_Token] = []
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch in " \t\r":
            i += 1
            continue
        if ch == "#":
            break
        col = i + 1
        if ch == "<":
            end = text.find(">", i + 1)
            if end < 0:
                diags.append(ParseDiagnostic(file, lineno, col, "unterminated IRI"))
                return tokens
            tokens.append(_Token(text[i + 1 : end], lineno, col, is_iri=True))
            i = end + 1
        elif ch == '"':
            out = []
            j = i + 1
            closed = False
            while j < n:
                c = text[j]
                if c == "\\":
                    if j + 1 >= n:
                        break
                    esc = text[j + 1]
                    out.append({"n": "\n", "t": "\t", '"': '"', "\\": "\\"}.get(esc, esc))
                    j += 2
                elif c == '"':
                    closed = True
                    j += 1
                    break
                else:
                    out.append(c)
                    j += 1
            if not closed:
                diags.append(ParseDiagnostic(file, lineno, col, "unterminated string literal"))
                return tokens
            tokens.append(_Token("".join(out), lineno, col, is_literal=True))
            i = j
        elif ch == ".":
            tokens.append(_Token(".", lineno, col))
            i += 1
        else:
            j = i
            while j < n and text[j] not in ' \t\r#<".':
                j += 1
            tokens.append(_Token(text[i:j], lineno, col))
            i = j
    return tokens


@dataclass(frozen=True)
class _Triple:
    subject: _Token
    predicate: _Token
    object: _Token


class _Document:
    """Prefix table plus raw triples, before any semantic resolution."""

    def __init__(self, text: str, file: str):
        self.file = file
        self.prefixes = dict(_BUILTIN_PREFIXES)
        self.triples: list[_Triple] = []
        self.diags: list[ParseDiagnostic] = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            tokens = _tokenize_line(raw, lineno, file, self.diags)
            if not tokens:
                continue
            if tokens[0].text == "@prefix" and not tokens[0].is_literal:
                self._read_prefix(tokens)
                continue
            self._read_triple(tokens)
        if self.diags:
            raise ParseError(self.diags)

    def _read_prefix(self, tokens: list[_Token]) -> None:
        t0 = tokens[0]
        if len(tokens) != 4 or tokens[3].text != "." or not tokens[1].text.endswith(":"):
            self.diags.append(
                ParseDiagnostic(self.file, t0.line, t0.column, "malformed @prefix line")
            )
            return
        name = tokens[1].text[:-1]
        ns = tokens[2].text
        if not ns.endswith(("#", "/")):
            self.diags.append(
                ParseDiagnostic(
                    self.file, tokens[2].line, tokens[2].column,
                    f"prefix namespace must end in '#' or '/': {ns!r}",
                )
            )
            return
        self.prefixes[name] = ns

    def _read_triple(self, tokens: list[_Token]) -> None:
        t0 = tokens[0]
        if len(tokens) != 4 or tokens[3].text != "." or tokens[3].is_literal:
            self.diags.append(
                ParseDiagnostic(
                    self.file, t0.line, t0.column, "expected '<subject> <predicate> <object> .'"
                )
            )
            return
        self.triples.append(_Triple(tokens[0], tokens[1], tokens[2]))

    def resolve(self, token: _Token) -> str | None:
        """Rendered IRI for a term token; records a diagnostic on failure."""
        if token.is_literal:
            self.diags.append(
                ParseDiagnostic(self.file, token.line, token.column, "unexpected string literal")
            )
            return None
        if token.is_iri:
            return token.text
        m = _PNAME_RE.match(token.text)
        if not m:
            self.diags.append(
                ParseDiagnostic(
                    self.file, token.line, token.column, f"malformed term {token.text!r}"
                )
            )
            return None
        prefix, local = m.group(1) or "", m.group(2)
        ns = self.prefixes.get(prefix)
        if ns is None:
            self.diags.append(
                ParseDiagnostic(
                    self.file, token.line, token.column, f"unknown prefix {prefix + ':'!r}"
                )
            )
            return None
        return ns + local

    def ontology_id(self) -> Iri:
        ns = self.prefixes[""]
        return Iri.parse(ns[:-1])


def _to_iri(rendered: str, token: _Token, doc: _Document) -> Iri | None:
    try:
        return Iri.parse(rendered)
    except OntologyError as exc:
        doc.diags.append(ParseDiagnostic(doc.file, token.line, token.column, str(exc)))
        return None


def parse_ontology(text: str, file: str = "<string>") -> Ontology:
    """Parse an ontology document; raises ParseError with all diagnostics."""
    doc = _Document(text, file)
    kinds: dict[Iri, EntityKind] = {}
    declared_at: dict[Iri, _Token] = {}

    # first pass: declarations
    for triple in doc.triples:
        pred = doc.resolve(triple.predicate)
        if pred != _RDF_TYPE or triple.object.is_literal:
            continue
        obj = doc.resolve(triple.object)
        kind = _KIND_BY_TYPE_OBJECT.get(obj) if obj else None
        if kind is None:
            continue
        subj_r = doc.resolve(triple.subject)
        if subj_r is None:
            continue
        subj = _to_iri(subj_r, triple.subject, doc)
        if subj is None:
            continue
        if subj in kinds and kinds[subj] is not kind:
            doc.diags.append(
                ParseDiagnostic(
                    doc.file, triple.subject.line, triple.subject.column,
                    f"conflicting declaration for {subj}: already a {kinds[subj].value}",
                )
            )
            continue
        kinds[subj] = kind
        declared_at.setdefault(subj, triple.subject)

    labels: dict[Iri, set[str]] = {}
    axioms: set[Axiom] = set()

    def term(token: _Token, want: EntityKind) -> Iri | None:
        rendered = doc.resolve(token)
        if rendered is None:
            return None
        iri = _to_iri(rendered, token, doc)
        if iri is None:
            return None
        got = kinds.get(iri)
        if got is None:
            doc.diags.append(
                ParseDiagnostic(
                    doc.file, token.line, token.column, f"undeclared entity {token.text}"
                )
            )
            return None
        if got is not want:
            doc.diags.append(
                ParseDiagnostic(
                    doc.file, token.line, token.column,
                    f"{token.text} is a {got.value}, expected a {want.value}",
                )
            )
            return None
        return iri

    # second pass: axioms and labels
    for triple in doc.triples:
        pred = doc.resolve(triple.predicate)
        if pred is None:
            continue
        if pred == _RDF_TYPE:
            obj_r = None if triple.object.is_literal else doc.resolve(triple.object)
            if obj_r in _KIND_BY_TYPE_OBJECT:
                continue  # handled in first pass
            ind = term(triple.subject, EntityKind.INDIVIDUAL)
            cls = term(triple.object, EntityKind.CLASS)
            if ind and cls:
                axioms.add(ClassAssertion(ind, cls))
        elif pred == _RDFS_LABEL:
            if not triple.object.is_literal:
                doc.diags.append(
                    ParseDiagnostic(
                        doc.file, triple.object.line, triple.object.column,
                        "rdfs:label requires a string literal",
                    )
                )
                continue
            subj_r = doc.resolve(triple.subject)
            subj = _to_iri(subj_r, triple.subject, doc) if subj_r else None
            if subj is None:
                continue
            if subj not in kinds:
                doc.diags.append(
                    ParseDiagnostic(
                        doc.file, triple.subject.line, triple.subject.column,
                        f"undeclared entity {triple.subject.text}",
                    )
                )
                continue
            labels.setdefault(subj, set()).add(triple.object.text)
        elif pred == _RDFS_SUBCLASS:
            a, b = term(triple.subject, EntityKind.CLASS), term(triple.object, EntityKind.CLASS)
            if a and b:
                axioms.add(SubClassOf(a, b))
        elif pred == _OWL_EQUIV:
            a, b = term(triple.subject, EntityKind.CLASS), term(triple.object, EntityKind.CLASS)
            if a and b:
                axioms.add(EquivalentClasses(a, b))
        elif pred == _OWL_DISJOINT:
            a, b = term(triple.subject, EntityKind.CLASS), term(triple.object, EntityKind.CLASS)
            if a and b:
                axioms.add(DisjointClasses(a, b))
        elif pred == _RDFS_SUBPROP:
            a = term(triple.subject, EntityKind.OBJECT_PROPERTY)
            b = term(triple.object, EntityKind.OBJECT_PROPERTY)
            if a and b:
                axioms.add(SubPropertyOf(a, b))
        elif pred == _RDFS_DOMAIN:
            p = term(triple.subject, EntityKind.OBJECT_PROPERTY)
            c = term(triple.object, EntityKind.CLASS)
            if p and c:
                axioms.add(Domain(p, c))
        elif pred == _RDFS_RANGE:
            p = term(triple.subject, EntityKind.OBJECT_PROPERTY)
            c = term(triple.object, EntityKind.CLASS)
            if p and c:
                axioms.add(Range(p, c))
        else:
            prop = _to_iri(pred, triple.predicate, doc)
            if prop is not None and kinds.get(prop) is EntityKind.OBJECT_PROPERTY:
                s = term(triple.subject, EntityKind.INDIVIDUAL)
                v = term(triple.object, EntityKind.INDIVIDUAL)
                if s and v:
                    axioms.add(PropertyAssertion(s, prop, v))
            else:
                doc.diags.append(
                    ParseDiagnostic(
                        doc.file, triple.predicate.line, triple.predicate.column,
                        f"unknown predicate {triple.predicate.text}",
                    )
                )

    if doc.diags:
        raise ParseError(doc.diags)
    entities = tuple(
        Entity(kind, iri, frozenset(labels.get(iri, ()))) for iri, kind in kinds.items()
    )
    return Ontology(doc.ontology_id(), entities, tuple(axioms))


@dataclass(frozen=True)
class AboxDocument:
    source: Iri
    assertions: tuple[Axiom, ...]


def parse_abox(
    text: str, kinds: Mapping[Iri, EntityKind], file: str = "<string>"
) -> AboxDocument:
    """Parse an ABox document: only assertion triples, against known declarations."""
    doc = _Document(text, file)
    assertions: set[Axiom] = set()

    def term(token: _Token, want: EntityKind) -> Iri | None:
        rendered = doc.resolve(token)
        if rendered is None:
            return None
        iri = _to_iri(rendered, token, doc)
        if iri is None:
            return None
        got = kinds.get(iri)
        if got is None:
            doc.diags.append(
                ParseDiagnostic(
                    doc.file, token.line, token.column, f"undeclared entity {token.text}"
                )
            )
            return None
        if got is not want:
            doc.diags.append(
                ParseDiagnostic(
                    doc.file, token.line, token.column,
                    f"{token.text} is a {got.value}, expected a {want.value}",
                )
            )
            return None
        return iri

    for triple in doc.triples:
        pred = doc.resolve(triple.predicate)
        if pred is None:
            continue
        if pred == _RDF_TYPE:
            obj_r = None if triple.object.is_literal else doc.resolve(triple.object)
            if obj_r in _KIND_BY_TYPE_OBJECT:
                doc.diags.append(
                    ParseDiagnostic(
                        doc.file, triple.predicate.line, triple.predicate.column,
                        "declarations are not allowed in ABox documents",
                    )
                )
                continue
            ind = term(triple.subject, EntityKind.INDIVIDUAL)
            cls = term(triple.object, EntityKind.CLASS)
            if ind and cls:
                assertions.add(ClassAssertion(ind, cls))
        else:
            prop = _to_iri(pred, triple.predicate, doc)
            if prop is not None and kinds.get(prop) is EntityKind.OBJECT_PROPERTY:
                s = term(triple.subject, EntityKind.INDIVIDUAL)
                v = term(triple.object, EntityKind.INDIVIDUAL)
                if s and v:
                    assertions.add(PropertyAssertion(s, prop, v))
            else:
                doc.diags.append(
                    ParseDiagnostic(
                        doc.file, triple.predicate.line, triple.predicate.column,
                        f"predicate {triple.predicate.text} not allowed in an ABox document",
                    )
                )

    if doc.diags:
        raise ParseError(doc.diags)
    return AboxDocument(doc.ontology_id(), tuple(sorted(assertions, key=axiom_sort_key)))


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\t", "\\t")


class _PrefixTable:
    def __init__(self, default_ns: str, namespaces: Iterable[str]):
        self.by_ns = {default_ns: "", RDF_NS: "rdf", RDFS_NS: "rdfs", OWL_NS: "owl"}
        extra = sorted(set(namespaces) - set(self.by_ns))
        for k, ns in enumerate(extra, start=1):
            self.by_ns[ns] = f"ns{k}"

    def render(self, iri: Iri) -> str:
        prefix = self.by_ns.get(iri.namespace)
        if prefix is None or not _SAFE_LOCAL_RE.match(iri.local):
            return f"<{iri.rendered}>"
        return f"{prefix}:{iri.local}"

    def header(self) -> list[str]:
        lines = []
        for ns, prefix in sorted(self.by_ns.items(), key=lambda kv: (kv[1], kv[0])):
            lines.append(f"@prefix {prefix}: <{ns}> .")
        return lines


def serialize_ontology(o: Ontology) -> str:
    """Canonical text form; `parse_ontology(serialize_ontology(o)) == o`."""
    default_ns = o.id.rendered + "#"
    table = _PrefixTable(default_ns, (e.iri.namespace for e in o.entities))
    kind_objects = {
        EntityKind.CLASS: "owl:Class",
        EntityKind.OBJECT_PROPERTY: "owl:ObjectProperty",
        EntityKind.INDIVIDUAL: "owl:NamedIndividual",
    }
    lines = table.header()
    if o.entities:
        lines.append("")
    for ent in o.entities:
        lines.append(f"{table.render(ent.iri)} rdf:type {kind_objects[ent.kind]} .")
    label_lines = []
    for ent in o.entities:
        for label in sorted(ent.labels):
            label_lines.append(f'{table.render(ent.iri)} rdfs:label "{_escape(label)}" .')
    if label_lines:
        lines.append("")
        lines.extend(label_lines)
    if o.axioms:
        lines.append("")
    for ax in o.axioms:
        lines.append(_render_axiom(ax, table))
    return "\n".join(lines) + "\n"


def serialize_abox(abox: AboxDocument) -> str:
    default_ns = abox.source.rendered + "#"
    namespaces = {i.namespace for ax in abox.assertions for i in _assertion_iris(ax)}
    table = _PrefixTable(default_ns, namespaces)
    lines = table.header()
    if abox.assertions:
        lines.append("")
    for ax in sorted(abox.assertions, key=axiom_sort_key):
        lines.append(_render_axiom(ax, table))
    return "\n".join(lines) + "\n"


def _assertion_iris(ax: Axiom) -> tuple[Iri, ...]:
    if isinstance(ax, ClassAssertion):
        return (ax.individual, ax.cls)
    if isinstance(ax, PropertyAssertion):
        return (ax.subject, ax.prop, ax.object)
    return ()


def _render_axiom(ax: Axiom, table: _PrefixTable) -> str:
    r = table.render
    if isinstance(ax, SubClassOf):
        return f"{r(ax.sub)} rdfs:subClassOf {r(ax.sup)} ."
    if isinstance(ax, EquivalentClasses):
        return f"{r(ax.a)} owl:equivalentClass {r(ax.b)} ."
    if isinstance(ax, DisjointClasses):
        return f"{r(ax.a)} owl:disjointWith {r(ax.b)} ."
    if isinstance(ax, SubPropertyOf):
        return f"{r(ax.sub)} rdfs:subPropertyOf {r(ax.sup)} ."
    if isinstance(ax, Domain):
        return f"{r(ax.prop)} rdfs:domain {r(ax.cls)} ."
    if isinstance(ax, Range):
        return f"{r(ax.prop)} rdfs:range {r(ax.cls)} ."
    if isinstance(ax, ClassAssertion):
        return f"{r(ax.individual)} rdf:type {r(ax.cls)} ."
    if isinstance(ax, PropertyAssertion):
        return f"{r(ax.subject)} {r(ax.prop)} {r(ax.object)} ."
    raise TypeError(f"not an axiom: {ax!r}")
