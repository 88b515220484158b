"""Conjunctive query documents.

    PREFIX ex: <http://.../ns#>          (optional, any number)
    SELECT ?v1 [?v2 ...] WHERE { <atom> . [<atom> .]* }

Atoms are ``?x rdf:type <ClassIri>`` or ``?x <PropIri> ?y|<IndIri>``; the
subject may also be an individual IRI. The empty prefix resolves to the
global namespace, since queries are posed in global vocabulary.
"""

from __future__ import annotations

import re

from ontmed.mediate import (
    Atom,
    ClassAtom,
    ConjunctiveQuery,
    MediationError,
    PropertyAtom,
    Term,
    Variable,
)
from ontmed.merge import GLOBAL_NAMESPACE
from ontmed.model import Iri, OntologyError

from .diagnostics import ParseDiagnostic, ParseError, fail
from .turtle import OWL_NS, RDF_NS, RDFS_NS, _SAFE_LOCAL_RE

_QUERY_PREFIXES = {"": GLOBAL_NAMESPACE, "rdf": RDF_NS, "rdfs": RDFS_NS, "owl": OWL_NS}
_RDF_TYPE = RDF_NS + "type"

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<iri><[^>\s]*>)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[{}.])
  | (?P<word>[^\s{}.<>#]+)
    """,
    re.VERBOSE,
)


class _Tok:
    def __init__(self, kind: str, text: str, line: int, column: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.column = column


def _tokenize(text: str, file: str) -> list[_Tok]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise fail(file, line, col, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup or "word"
        chunk = m.group(0)
        if kind not in ("ws", "comment"):
            tokens.append(_Tok(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    return tokens


class _Cursor:
    def __init__(self, tokens: list[_Tok], file: str):
        self.tokens = tokens
        self.file = file
        self.pos = 0

    def peek(self) -> _Tok | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def take(self, description: str) -> _Tok:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            line = last.line if last else 1
            col = last.column + len(last.text) if last else 1
            raise fail(self.file, line, col, f"unexpected end of query, expected {description}")
        self.pos += 1
        return tok

    def expect(self, literal: str) -> _Tok:
        tok = self.take(repr(literal))
        if tok.text != literal and tok.text.upper() != literal:
            raise fail(self.file, tok.line, tok.column, f"expected {literal!r}, got {tok.text!r}")
        return tok


def parse_query(text: str, query_id: str = "q", file: str = "<string>") -> ConjunctiveQuery:
    cur = _Cursor(_tokenize(text, file), file)
    prefixes = dict(_QUERY_PREFIXES)

    def resolve(tok: _Tok) -> Iri:
        if tok.kind == "iri":
            rendered = tok.text[1:-1]
        else:
            m = re.match(r"^([A-Za-z][A-Za-z0-9_\-]*)?:([A-Za-z_][A-Za-z0-9_\-]*)$", tok.text)
            if not m:
                raise fail(file, tok.line, tok.column, f"malformed term {tok.text!r}")
            ns = prefixes.get(m.group(1) or "")
            if ns is None:
                raise fail(file, tok.line, tok.column, f"unknown prefix {(m.group(1) or '') + ':'!r}")
            rendered = ns + m.group(2)
        try:
            return Iri.parse(rendered)
        except OntologyError as exc:
            raise fail(file, tok.line, tok.column, str(exc)) from None

    while True:
        tok = cur.peek()
        if tok is None:
            raise fail(file, 1, 1, "empty query document")
        if tok.kind == "word" and tok.text.upper() == "PREFIX":
            cur.take("PREFIX")
            name_tok = cur.take("prefix name")
            if not name_tok.text.endswith(":"):
                raise fail(file, name_tok.line, name_tok.column, "malformed PREFIX name")
            ns_tok = cur.take("namespace IRI")
            if ns_tok.kind != "iri" or not ns_tok.text[1:-1].endswith(("#", "/")):
                raise fail(
                    file, ns_tok.line, ns_tok.column,
                    "PREFIX namespace must be <...> ending in '#' or '/'",
                )
            prefixes[name_tok.text[:-1]] = ns_tok.text[1:-1]
            continue
        break

    cur.expect("SELECT")
    select_vars: list[str] = []
    while True:
        tok = cur.peek()
        if tok is not None and tok.kind == "var":
            cur.take("variable")
            select_vars.append(tok.text[1:])
            continue
        break
    if not select_vars:
        tok = cur.peek()
        raise fail(
            file, tok.line if tok else 1, tok.column if tok else 1,
            "SELECT requires at least one variable",
        )
    cur.expect("WHERE")
    cur.expect("{")

    atoms: list[Atom] = []
    while True:
        tok = cur.peek()
        if tok is None:
            raise fail(file, 1, 1, "unterminated WHERE block")
        if tok.text == "}":
            cur.take("'}'")
            break
        subject_tok = cur.take("atom subject")
        subject: Term = (
            Variable(subject_tok.text[1:]) if subject_tok.kind == "var" else resolve(subject_tok)
        )
        pred_tok = cur.take("atom predicate")
        if pred_tok.kind == "var":
            raise fail(file, pred_tok.line, pred_tok.column, "predicates cannot be variables")
        predicate = resolve(pred_tok)
        object_tok = cur.take("atom object")
        if predicate.rendered == _RDF_TYPE:
            if object_tok.kind == "var":
                raise fail(
                    file, object_tok.line, object_tok.column,
                    "the class of an rdf:type atom cannot be a variable",
                )
            atoms.append(ClassAtom(subject, resolve(object_tok)))
        else:
            obj: Term = (
                Variable(object_tok.text[1:]) if object_tok.kind == "var" else resolve(object_tok)
            )
            atoms.append(PropertyAtom(subject, predicate, obj))
        cur.expect(".")

    trailing = cur.peek()
    if trailing is not None:
        raise fail(file, trailing.line, trailing.column, f"unexpected {trailing.text!r} after query")
    if not atoms:
        raise fail(file, 1, 1, "empty query body")
    try:
        return ConjunctiveQuery(query_id, tuple(select_vars), tuple(atoms))
    except MediationError as exc:
        raise ParseError([ParseDiagnostic(file, 1, 1, str(exc))]) from None


def serialize_query(query: ConjunctiveQuery) -> str:
    """Canonical text form using full IRIs except for the global namespace."""

    def term(t: Term) -> str:
        if isinstance(t, Variable):
            return f"?{t.name}"
        return render_iri(t)

    def render_iri(iri: Iri) -> str:
        if iri.namespace == GLOBAL_NAMESPACE and _SAFE_LOCAL_RE.match(iri.local):
            return f":{iri.local}"
        return f"<{iri.rendered}>"

    parts = [f"SELECT {' '.join('?' + v for v in query.select_vars)} WHERE {{"]
    for atom in query.atoms:
        if isinstance(atom, ClassAtom):
            parts.append(f"  {term(atom.term)} rdf:type {render_iri(atom.cls)} .")
        else:
            parts.append(f"  {term(atom.subject)} {render_iri(atom.prop)} {term(atom.object)} .")
    parts.append("}")
    return "\n".join(parts) + "\n"
