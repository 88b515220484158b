"""In-memory ontology model and the subsumption reasoning built on it.

Everything here is immutable after construction and all operations are
pure functions, so values can be shared freely between threads or tasks.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from functools import total_ordering
from typing import Iterable, Mapping, Union

_NAMESPACE_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:\S*[#/]$")


class OntologyError(ValueError):
    """A model invariant was violated."""


@total_ordering
@dataclass(frozen=True)
class Iri:
    """A namespaced identifier; `namespace + local` is the rendered form."""

    namespace: str
    local: str

    def __post_init__(self) -> None:
        if not _NAMESPACE_RE.match(self.namespace):
            raise OntologyError(
                f"namespace must be an absolute URI ending in '#' or '/': {self.namespace!r}"
            )
        if not self.local or re.search(r"[\s#/]", self.local):
            raise OntologyError(f"invalid local name: {self.local!r}")

    @property
    def rendered(self) -> str:
        return self.namespace + self.local

    @classmethod
    def parse(cls, rendered: str) -> "Iri":
        """Split a rendered IRI at its last '#' or '/'."""
        cut = max(rendered.rfind("#"), rendered.rfind("/"))
        if cut <= 0 or cut == len(rendered) - 1:
            raise OntologyError(f"cannot split {rendered!r} into namespace and local name")
        return cls(rendered[: cut + 1], rendered[cut + 1 :])

    def __lt__(self, other: "Iri") -> bool:
        return self.rendered < other.rendered

    def __str__(self) -> str:
        return self.rendered


class EntityKind(Enum):
    CLASS = "Class"
    OBJECT_PROPERTY = "ObjectProperty"
    INDIVIDUAL = "Individual"


@dataclass(frozen=True)
class Entity:
    kind: EntityKind
    iri: Iri
    labels: frozenset[str] = frozenset()

    def __post_init__(self) -> None:
        object.__setattr__(self, "labels", frozenset(self.labels))


@dataclass(frozen=True)
class SubClassOf:
    sub: Iri
    sup: Iri


@dataclass(frozen=True)
class EquivalentClasses:
    a: Iri
    b: Iri

    def __post_init__(self) -> None:
        if self.b < self.a:
            a, b = self.a, self.b
            object.__setattr__(self, "a", b)
            object.__setattr__(self, "b", a)


@dataclass(frozen=True)
class DisjointClasses:
    a: Iri
    b: Iri

    def __post_init__(self) -> None:
        if self.b < self.a:
            a, b = self.a, self.b
            object.__setattr__(self, "a", b)
            object.__setattr__(self, "b", a)


@dataclass(frozen=True)
class SubPropertyOf:
    sub: Iri
    sup: Iri


@dataclass(frozen=True)
class Domain:
    prop: Iri
    cls: Iri


@dataclass(frozen=True)
class Range:
    prop: Iri
    cls: Iri


@dataclass(frozen=True)
class ClassAssertion:
    individual: Iri
    cls: Iri


@dataclass(frozen=True)
class PropertyAssertion:
    subject: Iri
    prop: Iri
    object: Iri


Axiom = Union[
    SubClassOf,
    EquivalentClasses,
    DisjointClasses,
    SubPropertyOf,
    Domain,
    Range,
    ClassAssertion,
    PropertyAssertion,
]

_AXIOM_RANK = {
    SubClassOf: 0,
    EquivalentClasses: 1,
    DisjointClasses: 2,
    SubPropertyOf: 3,
    Domain: 4,
    Range: 5,
    ClassAssertion: 6,
    PropertyAssertion: 7,
}


def axiom_iris(ax: Axiom) -> tuple[Iri, ...]:
    """The IRIs an axiom mentions, in field order."""
    if isinstance(ax, SubClassOf):
        return (ax.sub, ax.sup)
    if isinstance(ax, EquivalentClasses):
        return (ax.a, ax.b)
    if isinstance(ax, DisjointClasses):
        return (ax.a, ax.b)
    if isinstance(ax, SubPropertyOf):
        return (ax.sub, ax.sup)
    if isinstance(ax, Domain):
        return (ax.prop, ax.cls)
    if isinstance(ax, Range):
        return (ax.prop, ax.cls)
    if isinstance(ax, ClassAssertion):
        return (ax.individual, ax.cls)
    if isinstance(ax, PropertyAssertion):
        return (ax.subject, ax.prop, ax.object)
    raise TypeError(f"not an axiom: {ax!r}")


def axiom_sort_key(ax: Axiom) -> tuple:
    return (_AXIOM_RANK[type(ax)],) + tuple(i.rendered for i in axiom_iris(ax))


# (expected kinds per axiom field, same order as axiom_iris)
_AXIOM_KINDS: Mapping[type, tuple[EntityKind, ...]] = {
    SubClassOf: (EntityKind.CLASS, EntityKind.CLASS),
    EquivalentClasses: (EntityKind.CLASS, EntityKind.CLASS),
    DisjointClasses: (EntityKind.CLASS, EntityKind.CLASS),
    SubPropertyOf: (EntityKind.OBJECT_PROPERTY, EntityKind.OBJECT_PROPERTY),
    Domain: (EntityKind.OBJECT_PROPERTY, EntityKind.CLASS),
    Range: (EntityKind.OBJECT_PROPERTY, EntityKind.CLASS),
    ClassAssertion: (EntityKind.INDIVIDUAL, EntityKind.CLASS),
    PropertyAssertion: (EntityKind.INDIVIDUAL, EntityKind.OBJECT_PROPERTY, EntityKind.INDIVIDUAL),
}


@dataclass(frozen=True)
class Ontology:
    """A set of declared entities plus axioms over them.

    Construction canonicalizes (sorts, deduplicates) and validates
    referential closure: every IRI an axiom mentions must be declared
    with the kind the axiom position requires.
    """

    id: Iri
    entities: tuple[Entity, ...] = ()
    axioms: tuple[Axiom, ...] = ()

    def __post_init__(self) -> None:
        entities = tuple(sorted(set(self.entities), key=lambda e: e.iri.rendered))
        kinds: dict[Iri, EntityKind] = {}
        for ent in entities:
            if ent.iri in kinds:
                raise OntologyError(f"conflicting declarations for {ent.iri}")
            kinds[ent.iri] = ent.kind
        axioms = tuple(sorted(set(self.axioms), key=axiom_sort_key))
        for ax in axioms:
            for iri, want in zip(axiom_iris(ax), _AXIOM_KINDS[type(ax)]):
                got = kinds.get(iri)
                if got is None:
                    raise OntologyError(f"axiom references undeclared entity {iri}")
                if got is not want:
                    raise OntologyError(
                        f"axiom expects {iri} to be a {want.value}, but it is a {got.value}"
                    )
        object.__setattr__(self, "entities", entities)
        object.__setattr__(self, "axioms", axioms)
        object.__setattr__(self, "_kinds", kinds)

    def kind_of(self, iri: Iri) -> EntityKind | None:
        return self._kinds.get(iri)  # type: ignore[attr-defined]

    def labels_of(self, iri: Iri) -> frozenset[str]:
        for ent in self.entities:
            if ent.iri == iri:
                return ent.labels
        return frozenset()

    def iris_of_kind(self, kind: EntityKind) -> tuple[Iri, ...]:
        return tuple(e.iri for e in self.entities if e.kind is kind)

    def classes(self) -> tuple[Iri, ...]:
        return self.iris_of_kind(EntityKind.CLASS)

    def object_properties(self) -> tuple[Iri, ...]:
        return self.iris_of_kind(EntityKind.OBJECT_PROPERTY)

    def individuals(self) -> tuple[Iri, ...]:
        return self.iris_of_kind(EntityKind.INDIVIDUAL)

    def axioms_of(self, *types: type) -> tuple[Axiom, ...]:
        return tuple(ax for ax in self.axioms if isinstance(ax, types))


def signature(o: Ontology) -> frozenset[Iri]:
    """All declared entity IRIs."""
    return frozenset(e.iri for e in o.entities)


def _subclass_adjacency(o: Ontology) -> dict[Iri, set[Iri]]:
    adj: dict[Iri, set[Iri]] = {c: set() for c in o.classes()}
    for ax in o.axioms:
        if isinstance(ax, SubClassOf):
            adj[ax.sub].add(ax.sup)
        elif isinstance(ax, EquivalentClasses):
            adj[ax.a].add(ax.b)
            adj[ax.b].add(ax.a)
    return adj


def _reachable(adj: Mapping[Iri, set[Iri]], start: Iri) -> set[Iri]:
    seen = {start}
    stack = [start]
    while stack:
        node = stack.pop()
        for nxt in adj.get(node, ()):
            if nxt not in seen:
                seen.add(nxt)
                stack.append(nxt)
    return seen


def subsumption_closure(o: Ontology) -> frozenset[tuple[Iri, Iri]]:
    """Reflexive-transitive closure of SubClassOf; (x, y) means x is subsumed by y.

    Each EquivalentClasses(a, b) contributes edges in both directions.
    """
    adj = _subclass_adjacency(o)
    pairs: set[tuple[Iri, Iri]] = set()
    for cls in adj:
        for sup in _reachable(adj, cls):
            pairs.add((cls, sup))
    return frozenset(pairs)


def subproperty_closure(o: Ontology) -> frozenset[tuple[Iri, Iri]]:
    """Reflexive-transitive closure of SubPropertyOf; (p, q) means p is subsumed by q."""
    adj: dict[Iri, set[Iri]] = {p: set() for p in o.object_properties()}
    for ax in o.axioms:
        if isinstance(ax, SubPropertyOf):
            adj[ax.sub].add(ax.sup)
    pairs: set[tuple[Iri, Iri]] = set()
    for prop in adj:
        for sup in _reachable(adj, prop):
            pairs.add((prop, sup))
    return frozenset(pairs)


def disjointness_closure(o: Ontology) -> frozenset[tuple[Iri, Iri]]:
    """Unordered class pairs made disjoint by declarations inherited downward.

    A pair is included when some declared DisjointClasses(A, B) exists with
    one member subsumed by A and the other by B. Pairs are stored as sorted
    2-tuples; the two members may coincide.
    """
    closure = subsumption_closure(o)
    below: dict[Iri, set[Iri]] = {}
    for sub, sup in closure:
        below.setdefault(sup, set()).add(sub)
    pairs: set[tuple[Iri, Iri]] = set()
    for ax in o.axioms_of(DisjointClasses):
        assert isinstance(ax, DisjointClasses)
        for x in below.get(ax.a, ()):
            for y in below.get(ax.b, ()):
                pairs.add((x, y) if x <= y else (y, x))
    return frozenset(pairs)


def unsatisfiable_classes(o: Ontology) -> frozenset[Iri]:
    """Classes subsumed by both members of a disjoint pair."""
    closure = subsumption_closure(o)
    above: dict[Iri, set[Iri]] = {}
    for sub, sup in closure:
        above.setdefault(sub, set()).add(sup)
    disjoint = disjointness_closure(o)
    result: set[Iri] = set()
    for cls in o.classes():
        sups = above.get(cls, set())
        if any(x in sups and y in sups for x, y in disjoint):
            result.add(cls)
    return frozenset(result)


def make_entities(
    kind: EntityKind, iris: Iterable[Iri], labels: Mapping[Iri, Iterable[str]] | None = None
) -> tuple[Entity, ...]:
    """Convenience constructor for a batch of same-kind entities."""
    labels = labels or {}
    return tuple(Entity(kind, iri, frozenset(labels.get(iri, ()))) for iri in iris)
