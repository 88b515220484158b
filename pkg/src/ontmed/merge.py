"""Build one global ontology from local ontologies plus alignments.

Equivalence correspondences collapse entities into a single global node;
provenance records, for every global entity, which (source, local entity)
pairs it stands for.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Mapping, Sequence

from .align import Alignment, Correspondence, Relation
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
    PropertyAssertion,
    Range,
    SubClassOf,
    SubPropertyOf,
    subsumption_closure,
)

GLOBAL_NAMESPACE = "http://ontmed.local/global#"
GLOBAL_ONTOLOGY_ID = Iri("http://ontmed.local/", "global")

LocalRef = tuple[Iri, Iri]  # (source ontology id, local entity iri)


class MergeError(ValueError):
    pass


@dataclass(frozen=True)
class MergedOntology:
    global_ontology: Ontology
    provenance: Mapping[Iri, frozenset[LocalRef]]
    source_ids: tuple[Iri, ...] = ()

    @cached_property
    def _inverse(self) -> dict[LocalRef, Iri]:
        out: dict[LocalRef, Iri] = {}
        for global_iri, refs in self.provenance.items():
            for ref in refs:
                out[ref] = global_iri
        return out

    def sources(self) -> tuple[Iri, ...]:
        if self.source_ids:
            return tuple(sorted(self.source_ids))
        found = {src for refs in self.provenance.values() for src, _ in refs}
        return tuple(sorted(found))

    def global_of(self, source: Iri, local: Iri) -> Iri:
        try:
            return self._inverse[(source, local)]
        except KeyError:
            raise MergeError(f"no merged entity for {local} of {source}") from None

    def preimages(self, global_iri: Iri, source: Iri) -> tuple[Iri, ...]:
        refs = self.provenance.get(global_iri, frozenset())
        return tuple(sorted(local for src, local in refs if src == source))


class _UnionFind:
    def __init__(self, items: Sequence[LocalRef]):
        self.parent: dict[LocalRef, LocalRef] = {item: item for item in items}

    def find(self, item: LocalRef) -> LocalRef:
        root = item
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[item] != root:
            self.parent[item], item = root, self.parent[item]
        return root

    def union(self, a: LocalRef, b: LocalRef) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            # deterministic: smaller rendered pair wins as root
            if _ref_key(rb) < _ref_key(ra):
                ra, rb = rb, ra
            self.parent[rb] = ra

    def groups(self) -> list[tuple[LocalRef, ...]]:
        by_root: dict[LocalRef, list[LocalRef]] = {}
        for item in self.parent:
            by_root.setdefault(self.find(item), []).append(item)
        return [tuple(sorted(members, key=_ref_key)) for members in by_root.values()]


def _ref_key(ref: LocalRef) -> tuple[str, str]:
    return (ref[0].rendered, ref[1].rendered)


def _validate_correspondence(
    corr: Correspondence, alignment: Alignment, by_id: Mapping[Iri, Ontology]
) -> tuple[EntityKind, EntityKind]:
    for onto_id, end in ((alignment.onto1, corr.e1), (alignment.onto2, corr.e2)):
        onto = by_id.get(onto_id)
        if onto is None:
            raise MergeError(f"alignment references unknown ontology {onto_id}")
        if onto.kind_of(end) is None:
            raise MergeError(f"correspondence references unknown entity {end} of {onto_id}")
    k1 = by_id[alignment.onto1].kind_of(corr.e1)
    k2 = by_id[alignment.onto2].kind_of(corr.e2)
    assert k1 is not None and k2 is not None
    if k1 is not k2:
        raise MergeError(
            f"kind mismatch in correspondence {corr.e1} ({k1.value}) vs {corr.e2} ({k2.value})"
        )
    return k1, k2


def merge(locals_: Sequence[Ontology], alignments: Sequence[Alignment]) -> MergedOntology:
    """Union-find over equivalences, then rewrite every local axiom globally."""
    ordered = sorted(locals_, key=lambda o: o.id.rendered)
    by_id = {o.id: o for o in ordered}
    if len(by_id) != len(ordered):
        raise MergeError("duplicate ontology ids in merge input")
    ordered_alignments = sorted(
        alignments, key=lambda a: (a.onto1.rendered, a.onto2.rendered)
    )

    refs: list[LocalRef] = [
        (onto.id, entity.iri) for onto in ordered for entity in onto.entities
    ]
    finder = _UnionFind(refs)
    subsumption_links: list[tuple[LocalRef, LocalRef, EntityKind]] = []
    for alignment in ordered_alignments:
        for corr in alignment.correspondences:
            kind, _ = _validate_correspondence(corr, alignment, by_id)
            ref1 = (alignment.onto1, corr.e1)
            ref2 = (alignment.onto2, corr.e2)
            if corr.rel is Relation.EQUIVALENT:
                finder.union(ref1, ref2)
            else:
                if kind is EntityKind.INDIVIDUAL:
                    raise MergeError(
                        f"subsumption correspondence between individuals: {corr.e1}, {corr.e2}"
                    )
                if corr.rel is Relation.SUBSUMES:
                    subsumption_links.append((ref2, ref1, kind))
                else:
                    subsumption_links.append((ref1, ref2, kind))

    groups = sorted(
        finder.groups(),
        key=lambda g: (min(local.local for _, local in g), tuple(_ref_key(r) for r in g)),
    )
    taken: set[str] = set()
    image: dict[LocalRef, Iri] = {}
    entities: list[Entity] = []
    provenance: dict[Iri, frozenset[LocalRef]] = {}
    for group in groups:
        kinds = {by_id[src].kind_of(local) for src, local in group}
        if len(kinds) != 1:
            locs = ", ".join(f"{local} of {src}" for src, local in group)
            raise MergeError(f"equivalence collapses entities of different kinds: {locs}")
        kind = kinds.pop()
        assert kind is not None
        base = min(local.local for _, local in group)
        name = base
        counter = 2
        while name in taken:
            name = f"{base}-{counter}"
            counter += 1
        taken.add(name)
        global_iri = Iri(GLOBAL_NAMESPACE, name)
        labels = frozenset().union(
            *(by_id[src].labels_of(local) for src, local in group)
        )
        entities.append(Entity(kind, global_iri, labels))
        provenance[global_iri] = frozenset(group)
        for ref in group:
            image[ref] = global_iri

    axioms: set[Axiom] = set()
    for onto in ordered:
        for ax in onto.axioms:
            axioms.add(_rewrite(ax, onto.id, image))
    for sub_ref, sup_ref, kind in subsumption_links:
        if kind is EntityKind.CLASS:
            axioms.add(SubClassOf(image[sub_ref], image[sup_ref]))
        else:
            axioms.add(SubPropertyOf(image[sub_ref], image[sup_ref]))

    global_ontology = Ontology(GLOBAL_ONTOLOGY_ID, tuple(entities), tuple(axioms))
    return MergedOntology(global_ontology, provenance, tuple(o.id for o in ordered))


def _rewrite(ax: Axiom, source: Iri, image: Mapping[LocalRef, Iri]) -> Axiom:
    def m(local: Iri) -> Iri:
        return image[(source, local)]

    if isinstance(ax, SubClassOf):
        return SubClassOf(m(ax.sub), m(ax.sup))
    if isinstance(ax, EquivalentClasses):
        return EquivalentClasses(m(ax.a), m(ax.b))
    if isinstance(ax, DisjointClasses):
        return DisjointClasses(m(ax.a), m(ax.b))
    if isinstance(ax, SubPropertyOf):
        return SubPropertyOf(m(ax.sub), m(ax.sup))
    if isinstance(ax, Domain):
        return Domain(m(ax.prop), m(ax.cls))
    if isinstance(ax, Range):
        return Range(m(ax.prop), m(ax.cls))
    if isinstance(ax, ClassAssertion):
        return ClassAssertion(m(ax.individual), m(ax.cls))
    if isinstance(ax, PropertyAssertion):
        return PropertyAssertion(m(ax.subject), m(ax.prop), m(ax.object))
    raise TypeError(f"not an axiom: {ax!r}")


def project_closure(merged: MergedOntology, source: Iri) -> frozenset[tuple[Iri, Iri]]:
    """The merged subsumption closure translated back into one source's classes."""
    if source not in merged.sources():
        raise MergeError(f"unknown source {source}")
    closure = subsumption_closure(merged.global_ontology)
    pairs: set[tuple[Iri, Iri]] = set()
    for gx, gy in closure:
        for lx in merged.preimages(gx, source):
            for ly in merged.preimages(gy, source):
                pairs.add((lx, ly))
    return frozenset(pairs)
