"""Conjunctive query answering over the merged ontology and per-source stores.

A query in global vocabulary is expanded down the subsumption hierarchy,
rewritten onto every source through provenance, and evaluated against each
source's asserted facts; results come back in global vocabulary. A final
evaluation over the pooled translated facts picks up answers whose join
witnesses span sources.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence, Union

from .merge import MergedOntology
from .model import (
    ClassAssertion,
    EntityKind,
    Iri,
    Ontology,
    PropertyAssertion,
    signature,
    subproperty_closure,
    subsumption_closure,
    unsatisfiable_classes,
)


class MediationError(ValueError):
    pass


class QueryVocabularyError(MediationError):
    """A query constant is not part of the global schema."""


class UnanswerableQueryError(MediationError):
    """The query mentions a class the merged ontology makes unsatisfiable."""


@dataclass(frozen=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


Term = Union[Variable, Iri]


@dataclass(frozen=True)
class ClassAtom:
    term: Term
    cls: Iri


@dataclass(frozen=True)
class PropertyAtom:
    subject: Term
    prop: Iri
    object: Term


Atom = Union[ClassAtom, PropertyAtom]


@dataclass(frozen=True)
class ConjunctiveQuery:
    id: str
    select_vars: tuple[str, ...]
    atoms: tuple[Atom, ...]

    def __post_init__(self) -> None:
        if not self.atoms:
            raise MediationError(f"query {self.id}: empty body")
        if not self.select_vars:
            raise MediationError(f"query {self.id}: empty SELECT list")
        body_vars = {v.name for v in self.variables()}
        for var in self.select_vars:
            if var not in body_vars:
                raise MediationError(f"query {self.id}: unbound select variable ?{var}")

    def variables(self) -> tuple[Variable, ...]:
        seen: list[Variable] = []
        for atom in self.atoms:
            terms = (atom.term,) if isinstance(atom, ClassAtom) else (atom.subject, atom.object)
            for term in terms:
                if isinstance(term, Variable) and term not in seen:
                    seen.append(term)
        return tuple(seen)

    def constants(self) -> tuple[tuple[Iri, EntityKind], ...]:
        """Every IRI the query mentions, with the kind its position requires."""
        out: list[tuple[Iri, EntityKind]] = []
        for atom in self.atoms:
            if isinstance(atom, ClassAtom):
                out.append((atom.cls, EntityKind.CLASS))
                if isinstance(atom.term, Iri):
                    out.append((atom.term, EntityKind.INDIVIDUAL))
            else:
                out.append((atom.prop, EntityKind.OBJECT_PROPERTY))
                for term in (atom.subject, atom.object):
                    if isinstance(term, Iri):
                        out.append((term, EntityKind.INDIVIDUAL))
        return tuple(out)


@dataclass(frozen=True)
class AnswerSet:
    query_id: str
    tuples: frozenset[tuple[Iri, ...]]

    def sorted_tuples(self) -> list[tuple[Iri, ...]]:
        return sorted(self.tuples, key=lambda t: tuple(i.rendered for i in t))


@dataclass(frozen=True)
class SourceStore:
    """Asserted facts of one source, indexed for lookup."""

    source: Iri
    class_assertions: frozenset[tuple[Iri, Iri]]
    property_assertions: frozenset[tuple[Iri, Iri, Iri]]
    by_class: Mapping[Iri, frozenset[Iri]] = field(init=False)
    by_property: Mapping[Iri, frozenset[tuple[Iri, Iri]]] = field(init=False)

    def __post_init__(self) -> None:
        by_class: dict[Iri, set[Iri]] = {}
        for ind, cls in self.class_assertions:
            by_class.setdefault(cls, set()).add(ind)
        by_property: dict[Iri, set[tuple[Iri, Iri]]] = {}
        for subj, prop, obj in self.property_assertions:
            by_property.setdefault(prop, set()).add((subj, obj))
        object.__setattr__(
            self, "by_class", {k: frozenset(v) for k, v in by_class.items()}
        )
        object.__setattr__(
            self, "by_property", {k: frozenset(v) for k, v in by_property.items()}
        )

    def individuals(self) -> frozenset[Iri]:
        out = {ind for ind, _ in self.class_assertions}
        for subj, _, obj in self.property_assertions:
            out.add(subj)
            out.add(obj)
        return frozenset(out)


def build_store(ontology: Ontology, extra_assertions: Iterable = ()) -> SourceStore:
    """Collect asserted facts from an ontology's ABox plus extra assertion axioms."""
    class_assertions: set[tuple[Iri, Iri]] = set()
    property_assertions: set[tuple[Iri, Iri, Iri]] = set()
    known = signature(ontology)
    for ax in list(ontology.axioms) + list(extra_assertions):
        if isinstance(ax, ClassAssertion):
            refs = (ax.individual, ax.cls)
            class_assertions.add((ax.individual, ax.cls))
        elif isinstance(ax, PropertyAssertion):
            refs = (ax.subject, ax.prop, ax.object)
            property_assertions.add((ax.subject, ax.prop, ax.object))
        else:
            continue
        for ref in refs:
            if ref not in known:
                raise MediationError(f"store fact references {ref}, undeclared in {ontology.id}")
    return SourceStore(ontology.id, frozenset(class_assertions), frozenset(property_assertions))


def expand_query(query: ConjunctiveQuery, merged: MergedOntology) -> tuple[ConjunctiveQuery, ...]:
    """All variants with every atom replaced by each of its subsumees."""
    available = signature(merged.global_ontology)
    for const, want in query.constants():
        if const not in available:
            raise QueryVocabularyError(
                f"query {query.id}: vocabulary not in global schema: {const}"
            )
        got = merged.global_ontology.kind_of(const)
        if got is not want:
            raise QueryVocabularyError(
                f"query {query.id}: {const} is a {got.value}, expected a {want.value}"
            )
    class_closure = subsumption_closure(merged.global_ontology)
    prop_closure = subproperty_closure(merged.global_ontology)

    def subs(closure, upper: Iri) -> list[Iri]:
        return sorted({low for low, up in closure if up == upper})

    variants: list[tuple[Atom, ...]] = [()]
    for atom in query.atoms:
        if isinstance(atom, ClassAtom):
            options: list[Atom] = [ClassAtom(atom.term, d) for d in subs(class_closure, atom.cls)]
        else:
            options = [
                PropertyAtom(atom.subject, q, atom.object)
                for q in subs(prop_closure, atom.prop)
            ]
        variants = [prefix + (opt,) for prefix in variants for opt in options]
    return tuple(
        ConjunctiveQuery(query.id, query.select_vars, atoms) for atoms in variants
    )


def rewrite_for_source(
    query: ConjunctiveQuery, merged: MergedOntology, source: Iri
) -> tuple[ConjunctiveQuery, ...]:
    """Rewritings of one expanded variant onto a source's vocabulary.

    Empty when some constant has no preimage there; one rewriting per
    combination when constants have several preimages.
    """
    options: dict[Iri, tuple[Iri, ...]] = {}
    for const, _ in query.constants():
        if const not in options:
            pre = merged.preimages(const, source)
            if not pre:
                return ()
            options[const] = pre

    rewritings: list[dict[Iri, Iri]] = [{}]
    for const, choices in sorted(options.items(), key=lambda kv: kv[0].rendered):
        rewritings = [
            {**mapping, const: choice} for mapping in rewritings for choice in choices
        ]

    def rewrite_term(term: Term, mapping: Mapping[Iri, Iri]) -> Term:
        return mapping[term] if isinstance(term, Iri) else term

    out = []
    for mapping in rewritings:
        atoms: list[Atom] = []
        for atom in query.atoms:
            if isinstance(atom, ClassAtom):
                atoms.append(ClassAtom(rewrite_term(atom.term, mapping), mapping[atom.cls]))
            else:
                atoms.append(
                    PropertyAtom(
                        rewrite_term(atom.subject, mapping),
                        mapping[atom.prop],
                        rewrite_term(atom.object, mapping),
                    )
                )
        out.append(ConjunctiveQuery(query.id, query.select_vars, tuple(atoms)))
    return tuple(out)


def _atom_candidates(atom: Atom, store: SourceStore, binding: Mapping[str, Iri]):
    """Bindings extending `binding` that satisfy the atom against the store."""

    def value(term: Term) -> Iri | None:
        if isinstance(term, Iri):
            return term
        return binding.get(term.name)

    if isinstance(atom, ClassAtom):
        bound = value(atom.term)
        members = store.by_class.get(atom.cls, frozenset())
        if bound is not None:
            if bound in members:
                yield dict(binding)
            return
        assert isinstance(atom.term, Variable)
        for ind in members:
            extended = dict(binding)
            extended[atom.term.name] = ind
            yield extended
        return

    pairs = store.by_property.get(atom.prop, frozenset())
    subj_val, obj_val = value(atom.subject), value(atom.object)
    for subj, obj in pairs:
        if subj_val is not None and subj != subj_val:
            continue
        if obj_val is not None and obj != obj_val:
            continue
        extended = dict(binding)
        if isinstance(atom.subject, Variable):
            extended[atom.subject.name] = subj
        if isinstance(atom.object, Variable):
            if atom.object.name in extended and extended[atom.object.name] != obj:
                continue
            extended[atom.object.name] = obj
        yield extended


def _atom_selectivity(atom: Atom, store: SourceStore) -> int:
    if isinstance(atom, ClassAtom):
        return len(store.by_class.get(atom.cls, ()))
    return len(store.by_property.get(atom.prop, ()))


def evaluate_local(query: ConjunctiveQuery, store: SourceStore) -> frozenset[tuple[Iri, ...]]:
    """All satisfying assignments, projected onto the SELECT variables."""
    atoms = sorted(query.atoms, key=lambda a: _atom_selectivity(a, store))
    bindings: list[dict[str, Iri]] = [{}]
    for atom in atoms:
        bindings = [ext for b in bindings for ext in _atom_candidates(atom, store, b)]
        if not bindings:
            return frozenset()
    return frozenset(
        tuple(b[var] for var in query.select_vars) for b in bindings
    )


def _translate_store(store: SourceStore, merged: MergedOntology) -> SourceStore:
    def to_global(local: Iri) -> Iri:
        return merged.global_of(store.source, local)

    return SourceStore(
        merged.global_ontology.id,
        frozenset((to_global(i), to_global(c)) for i, c in store.class_assertions),
        frozenset(
            (to_global(s), to_global(p), to_global(o))
            for s, p, o in store.property_assertions
        ),
    )


def pooled_store(merged: MergedOntology, stores: Sequence[SourceStore]) -> SourceStore:
    """All stores translated into global vocabulary and unioned."""
    class_assertions: set[tuple[Iri, Iri]] = set()
    property_assertions: set[tuple[Iri, Iri, Iri]] = set()
    for store in stores:
        translated = _translate_store(store, merged)
        class_assertions |= translated.class_assertions
        property_assertions |= translated.property_assertions
    return SourceStore(
        merged.global_ontology.id, frozenset(class_assertions), frozenset(property_assertions)
    )


def answer_query(
    query: ConjunctiveQuery, merged: MergedOntology, stores: Sequence[SourceStore]
) -> AnswerSet:
    """Merge per-source answers with a pooled pass for cross-source joins."""
    unsat = unsatisfiable_classes(merged.global_ontology)
    for atom in query.atoms:
        if isinstance(atom, ClassAtom) and atom.cls in unsat:
            raise UnanswerableQueryError(
                f"query {query.id}: class {atom.cls} is unsatisfiable; query is unanswerable"
            )
    variants = expand_query(query, merged)
    tuples: set[tuple[Iri, ...]] = set()
    for store in stores:
        for variant in variants:
            for rewriting in rewrite_for_source(variant, merged, store.source):
                for local_tuple in evaluate_local(rewriting, store):
                    tuples.add(
                        tuple(merged.global_of(store.source, ind) for ind in local_tuple)
                    )
    pooled = pooled_store(merged, stores)
    for variant in variants:
        tuples |= evaluate_local(variant, pooled)
    return AnswerSet(query.id, frozenset(tuples))
