"""Lexical alignment of two ontologies plus alignment validation and repair.

Validation applies three principles: consistency (no unsatisfiable classes
in the merged ontology), locality (linked entities have similar
neighborhoods), and conservativity (the merge entails no new subsumption
between entities of a single input).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .model import (
    Entity,
    EntityKind,
    Iri,
    Ontology,
    SubClassOf,
    subsumption_closure,
)

DEFAULT_SIMILARITY_THETA = 0.85
DEFAULT_LOCALITY_TAU = 0.5


class AlignmentError(ValueError):
    pass


class Relation(Enum):
    EQUIVALENT = "="
    SUBSUMED_BY = "<"
    SUBSUMES = ">"


class Principle(Enum):
    CONSISTENCY = "Consistency"
    LOCALITY = "Locality"
    CONSERVATIVITY = "Conservativity"


@dataclass(frozen=True)
class Correspondence:
    e1: Iri
    e2: Iri
    rel: Relation
    conf: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.conf <= 1.0:
            raise AlignmentError(f"confidence out of range: {self.conf}")

    def flipped(self) -> "Correspondence":
        flip = {
            Relation.EQUIVALENT: Relation.EQUIVALENT,
            Relation.SUBSUMES: Relation.SUBSUMED_BY,
            Relation.SUBSUMED_BY: Relation.SUBSUMES,
        }
        return Correspondence(self.e2, self.e1, flip[self.rel], self.conf)


def _corr_key(c: Correspondence) -> tuple:
    return (c.e1.rendered, c.e2.rendered, c.rel.value)


@dataclass(frozen=True)
class Alignment:
    onto1: Iri
    onto2: Iri
    correspondences: tuple[Correspondence, ...] = ()

    def __post_init__(self) -> None:
        corrs = tuple(sorted(self.correspondences, key=_corr_key))
        keys = [_corr_key(c) for c in corrs]
        if len(set(keys)) != len(keys):
            dup = next(k for k in keys if keys.count(k) > 1)
            raise AlignmentError(f"duplicate correspondence {dup}")
        object.__setattr__(self, "correspondences", corrs)


@dataclass(frozen=True)
class PrincipleViolation:
    principle: Principle
    witnesses: tuple[Iri, ...]
    implicated: tuple[Correspondence, ...]
    explanation: str


@dataclass(frozen=True)
class RemovedCorrespondence:
    onto1: Iri
    onto2: Iri
    correspondence: Correspondence


_CAMEL_RE = re.compile(r"(?<=[a-z0-9])(?=[A-Z])")


def normalize_name(name: str) -> str:
    """Case-folded concatenation of the tokens of a name or label."""
    parts = _CAMEL_RE.sub(" ", name)
    tokens = re.split(r"[\s_\-]+", parts)
    return "".join(t.casefold() for t in tokens if t)


def levenshtein(a: str, b: str) -> int:
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        current = [i]
        for j, cb in enumerate(b, start=1):
            current.append(
                min(previous[j] + 1, current[j - 1] + 1, previous[j - 1] + (ca != cb))
            )
        previous = current
    return previous[-1]


def name_similarity(a: str, b: str) -> float:
    """1 - dist/maxlen over normalized token strings."""
    na, nb = normalize_name(a), normalize_name(b)
    longest = max(len(na), len(nb))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(na, nb) / longest


def entity_similarity(e1: Entity, e2: Entity) -> float:
    """Best similarity over names and labels of the two entities."""
    names1 = [e1.iri.local, *sorted(e1.labels)]
    names2 = [e2.iri.local, *sorted(e2.labels)]
    return max(name_similarity(a, b) for a in names1 for b in names2)


def compute_alignment(
    o1: Ontology, o2: Ontology, theta: float = DEFAULT_SIMILARITY_THETA
) -> Alignment:
    """Equivalences between same-kind entities with name similarity >= theta.

    Each entity joins at most one correspondence: candidates are taken
    greedily by descending confidence, ties broken on (e1, e2).
    """
    if o1.id == o2.id:
        raise AlignmentError("cannot align an ontology with itself")
    candidates: list[tuple[float, Iri, Iri]] = []
    for kind in EntityKind:
        ents1 = [e for e in o1.entities if e.kind is kind]
        ents2 = [e for e in o2.entities if e.kind is kind]
        for a in ents1:
            for b in ents2:
                sim = entity_similarity(a, b)
                if sim >= theta:
                    candidates.append((sim, a.iri, b.iri))
    candidates.sort(key=lambda c: (-c[0], c[1].rendered, c[2].rendered))
    used1: set[Iri] = set()
    used2: set[Iri] = set()
    chosen: list[Correspondence] = []
    for sim, e1, e2 in candidates:
        if e1 in used1 or e2 in used2:
            continue
        used1.add(e1)
        used2.add(e2)
        chosen.append(Correspondence(e1, e2, Relation.EQUIVALENT, sim))
    return Alignment(o1.id, o2.id, tuple(chosen))


def _neighborhood(o: Ontology, cls: Iri) -> frozenset[Iri]:
    """Direct superclasses and direct subclasses via declared SubClassOf."""
    out: set[Iri] = set()
    for ax in o.axioms:
        if isinstance(ax, SubClassOf):
            if ax.sub == cls:
                out.add(ax.sup)
            elif ax.sup == cls:
                out.add(ax.sub)
    return frozenset(out)


def check_locality_principle(
    o1: Ontology, o2: Ontology, alignment: Alignment, tau: float = DEFAULT_LOCALITY_TAU
) -> list[PrincipleViolation]:
    """Flag class correspondences whose mapped neighborhoods disagree."""
    counterparts: dict[Iri, set[Iri]] = {}
    for corr in alignment.correspondences:
        counterparts.setdefault(corr.e1, set()).add(corr.e2)
    violations = []
    for corr in alignment.correspondences:
        if o1.kind_of(corr.e1) is not EntityKind.CLASS:
            continue
        n1 = _neighborhood(o1, corr.e1)
        n2 = _neighborhood(o2, corr.e2)
        if not n1 or not n2:
            continue
        mapped = set().union(*(counterparts.get(n, set()) for n in n1))
        union = mapped | n2
        score = len(mapped & n2) / len(union) if union else 1.0
        if score < tau:
            violations.append(
                PrincipleViolation(
                    Principle.LOCALITY,
                    (corr.e1, corr.e2),
                    (corr,),
                    f"neighborhood overlap {score:.3f} below {tau} for {corr.e1} = {corr.e2}",
                )
            )
    return violations


def _between(
    closure: frozenset[tuple[Iri, Iri]], lower: Iri, upper: Iri
) -> set[Iri]:
    """Classes D with lower <= D <= upper in the subsumption closure."""
    return {d for (x, d) in closure if x == lower and (d, upper) in closure}


def _implicated_via(
    merged, witnesses: set[Iri], alignments: Sequence[Alignment]
) -> tuple[Correspondence, ...]:
    """Correspondences whose merged image lies in the witness set."""
    out = []
    for alignment in alignments:
        for corr in alignment.correspondences:
            img1 = merged.global_of(alignment.onto1, corr.e1)
            img2 = merged.global_of(alignment.onto2, corr.e2)
            if img1 in witnesses or img2 in witnesses:
                out.append(corr)
    return tuple(sorted(set(out), key=_corr_key))


def check_consistency_principle(
    locals_: Sequence[Ontology], alignments: Sequence[Alignment]
) -> list[PrincipleViolation]:
    """One violation per class the merge makes unsatisfiable.

    Classes already unsatisfiable inside every contributing source are the
    sources' own problem, not the alignment's, and are not reported.
    """
    from .merge import merge
    from .model import DisjointClasses, unsatisfiable_classes

    merged = merge(locals_, alignments)
    closure = subsumption_closure(merged.global_ontology)
    unsat = unsatisfiable_classes(merged.global_ontology)
    locally_unsat = {
        (onto.id, cls) for onto in locals_ for cls in unsatisfiable_classes(onto)
    }
    violations = []
    for cls in sorted(unsat):
        refs = merged.provenance[cls]
        if all(ref in locally_unsat for ref in refs):
            continue
        witnesses: set[Iri] = set()
        for ax in merged.global_ontology.axioms_of(DisjointClasses):
            assert isinstance(ax, DisjointClasses)
            if (cls, ax.a) in closure and (cls, ax.b) in closure:
                witnesses |= _between(closure, cls, ax.a)
                witnesses |= _between(closure, cls, ax.b)
                witnesses |= {cls, ax.a, ax.b}
        violations.append(
            PrincipleViolation(
                Principle.CONSISTENCY,
                (cls,),
                _implicated_via(merged, witnesses, alignments),
                f"merged class {cls} is unsatisfiable",
            )
        )
    return violations


def check_conservativity_principle(
    locals_: Sequence[Ontology], alignments: Sequence[Alignment]
) -> list[PrincipleViolation]:
    """Flag subsumptions the merge introduces between one source's classes.

    A pair that becomes mutually subsumed (an entity collapse) is reported
    as a single violation.
    """
    from .merge import merge, project_closure

    merged = merge(locals_, alignments)
    global_closure = subsumption_closure(merged.global_ontology)
    violations = []
    for local in sorted(locals_, key=lambda o: o.id.rendered):
        own = subsumption_closure(local)
        projected = project_closure(merged, local.id)
        new_pairs = {p for p in projected if p not in own}
        reported: set[tuple[Iri, Iri]] = set()
        for x, y in sorted(new_pairs, key=lambda p: (p[0].rendered, p[1].rendered)):
            if (x, y) in reported:
                continue
            mutual = (y, x) in new_pairs
            reported.add((x, y))
            if mutual:
                reported.add((y, x))
            gx = merged.global_of(local.id, x)
            gy = merged.global_of(local.id, y)
            witnesses = _between(global_closure, gx, gy) | {gx, gy}
            if mutual:
                text = f"{x} and {y} of {local.id} collapse into a mutual subsumption"
            else:
                text = f"merge entails new subsumption {x} under {y} in {local.id}"
            violations.append(
                PrincipleViolation(
                    Principle.CONSERVATIVITY,
                    (x, y),
                    _implicated_via(merged, witnesses, alignments),
                    text,
                )
            )
    return violations


def check_all_principles(
    locals_: Sequence[Ontology],
    alignments: Sequence[Alignment],
    tau: float = DEFAULT_LOCALITY_TAU,
) -> list[PrincipleViolation]:
    by_id = {o.id: o for o in locals_}
    violations = check_consistency_principle(locals_, alignments)
    for alignment in alignments:
        violations.extend(
            check_locality_principle(by_id[alignment.onto1], by_id[alignment.onto2], alignment, tau)
        )
    violations.extend(check_conservativity_principle(locals_, alignments))
    return violations


def repair_alignment(
    locals_: Sequence[Ontology],
    alignments: Sequence[Alignment],
    tau: float = DEFAULT_LOCALITY_TAU,
) -> tuple[list[Alignment], list[RemovedCorrespondence]]:
    """Greedily drop the lowest-confidence implicated correspondence until clean.

    Violations that implicate no correspondence (inconsistencies already
    present in a source) cannot be repaired here and do not drive removals.
    """
    current = list(alignments)
    removed: list[RemovedCorrespondence] = []
    while any(a.correspondences for a in current):
        violations = check_all_principles(locals_, current, tau)
        implicated = {c for v in violations for c in v.implicated}
        if not implicated:
            break
        pool = [
            (corr.conf, corr.e1.rendered, corr.e2.rendered, idx, corr)
            for idx, alignment in enumerate(current)
            for corr in alignment.correspondences
            if corr in implicated
        ]
        conf, _, _, idx, victim = min(pool, key=lambda item: item[:4])
        del conf
        keep = tuple(c for c in current[idx].correspondences if c != victim)
        removed.append(RemovedCorrespondence(current[idx].onto1, current[idx].onto2, victim))
        current[idx] = Alignment(current[idx].onto1, current[idx].onto2, keep)
    return current, removed
