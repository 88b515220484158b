"""Quality lint for ontologies: inconsistency, incompleteness, redundancy,
and design anomalies, plus the safe redundancy repair.

Only redundancy has an automatic fix; removing entailed axioms cannot
change meaning, while fixing a disjointness or inventing a missing axiom
would.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .model import (
    Axiom,
    ClassAssertion,
    DisjointClasses,
    Domain,
    EntityKind,
    EquivalentClasses,
    Iri,
    Ontology,
    PropertyAssertion,
    Range,
    SubClassOf,
    axiom_iris,
    axiom_sort_key,
    disjointness_closure,
    subsumption_closure,
    unsatisfiable_classes,
)

DEFAULT_CHAIN_LENGTH = 3
DEFAULT_CLUMP_SIZE = 3


class Category(Enum):
    CIRCULATORY_ERROR = "CirculatoryError"
    PARTITION_ERROR = "PartitionError"
    SEMANTIC_INCONSISTENCY = "SemanticInconsistency"
    INCOMPLETE_SPECIFICATION = "IncompleteSpecification"
    PARTITION_OMISSION = "PartitionOmission"
    REDUNDANT_SUBSUMPTION = "RedundantSubsumption"
    DUPLICATE_DEFINITION = "DuplicateDefinition"
    REDUNDANT_INSTANTIATION = "RedundantInstantiation"
    LAZY_CONCEPT = "LazyConcept"
    CHAIN_OF_INHERITANCE = "ChainOfInheritance"
    LONELY_DISJOINT = "LonelyDisjoint"
    PROPERTY_CLUMP = "PropertyClump"


class Severity(Enum):
    ERROR = "Error"
    WARNING = "Warning"
    INFO = "Info"


SEVERITY_BY_CATEGORY = {
    Category.CIRCULATORY_ERROR: Severity.ERROR,
    Category.PARTITION_ERROR: Severity.ERROR,
    Category.SEMANTIC_INCONSISTENCY: Severity.ERROR,
    Category.INCOMPLETE_SPECIFICATION: Severity.WARNING,
    Category.PARTITION_OMISSION: Severity.WARNING,
    Category.REDUNDANT_SUBSUMPTION: Severity.WARNING,
    Category.DUPLICATE_DEFINITION: Severity.WARNING,
    Category.REDUNDANT_INSTANTIATION: Severity.WARNING,
    Category.LAZY_CONCEPT: Severity.INFO,
    Category.CHAIN_OF_INHERITANCE: Severity.INFO,
    Category.LONELY_DISJOINT: Severity.INFO,
    Category.PROPERTY_CLUMP: Severity.INFO,
}


@dataclass(frozen=True)
class Finding:
    category: Category
    entities: tuple[Iri, ...]
    explanation: str
    severity: Severity = field(init=False)

    def __post_init__(self) -> None:
        if not self.entities:
            raise ValueError("finding must name at least one entity")
        object.__setattr__(self, "severity", SEVERITY_BY_CATEGORY[self.category])


def _finding_key(f: Finding) -> tuple:
    return (f.category.value, tuple(i.rendered for i in f.entities), f.explanation)


@dataclass(frozen=True)
class QualityReport:
    target: Iri
    findings: tuple[Finding, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "findings", tuple(sorted(self.findings, key=_finding_key)))

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for f in self.findings:
            out[f.category.value] = out.get(f.category.value, 0) + 1
        return out

    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self.findings if f.severity is Severity.ERROR)

    def render_text(self) -> str:
        lines = []
        for f in self.findings:
            ents = ",".join(i.rendered for i in f.entities)
            lines.append(f"{f.severity.value.upper()} {f.category.value} {ents} — {f.explanation}")
        return "\n".join(lines) + ("\n" if lines else "")


class RepairPreconditionError(ValueError):
    """Redundancy repair refused because the subsumption graph is cyclic."""

    def __init__(self, findings: Sequence[Finding]):
        self.findings = tuple(findings)
        super().__init__("cannot repair redundancies in a cyclic hierarchy")


def _subclass_graph(o: Ontology) -> dict[Iri, list[Iri]]:
    adj: dict[Iri, list[Iri]] = {c: [] for c in o.classes()}
    for ax in o.axioms_of(SubClassOf):
        assert isinstance(ax, SubClassOf)
        adj[ax.sub].append(ax.sup)
    return adj


def detect_circulatory(o: Ontology) -> list[Finding]:
    """Cycles in the declared SubClassOf graph; equivalences do not count."""
    adj = _subclass_graph(o)
    findings = []
    for comp in _tarjan_sccs(adj):
        if len(comp) >= 2:
            members = tuple(sorted(comp))
            names = ", ".join(i.local for i in members)
            findings.append(
                Finding(
                    Category.CIRCULATORY_ERROR,
                    members,
                    f"subsumption cycle through {names}",
                )
            )
    for ax in o.axioms_of(SubClassOf):
        assert isinstance(ax, SubClassOf)
        if ax.sub == ax.sup:
            findings.append(
                Finding(
                    Category.CIRCULATORY_ERROR,
                    (ax.sub,),
                    f"{ax.sub.local} is declared a subclass of itself",
                )
            )
    return findings


def _tarjan_sccs(adj: dict[Iri, list[Iri]]) -> list[frozenset[Iri]]:
    index: dict[Iri, int] = {}
    low: dict[Iri, int] = {}
    on_stack: set[Iri] = set()
    stack: list[Iri] = []
    counter = [0]
    out: list[frozenset[Iri]] = []

    def strongconnect(root: Iri) -> None:
        work = [(root, iter(adj[root]))]
        index[root] = low[root] = counter[0]
        counter[0] += 1
        stack.append(root)
        on_stack.add(root)
        while work:
            node, it = work[-1]
            advanced = False
            for nxt in it:
                if nxt not in index:
                    index[nxt] = low[nxt] = counter[0]
                    counter[0] += 1
                    stack.append(nxt)
                    on_stack.add(nxt)
                    work.append((nxt, iter(adj[nxt])))
                    advanced = True
                    break
                if nxt in on_stack:
                    low[node] = min(low[node], index[nxt])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])
            if low[node] == index[node]:
                comp = set()
                while True:
                    member = stack.pop()
                    on_stack.discard(member)
                    comp.add(member)
                    if member == node:
                        break
                out.append(frozenset(comp))

    for start in adj:
        if start not in index:
            strongconnect(start)
    return out


def _memberships(o: Ontology) -> dict[Iri, set[Iri]]:
    """Asserted-or-inherited class memberships per individual."""
    closure = subsumption_closure(o)
    above: dict[Iri, set[Iri]] = {}
    for sub, sup in closure:
        above.setdefault(sub, set()).add(sup)
    out: dict[Iri, set[Iri]] = {}
    for ax in o.axioms_of(ClassAssertion):
        assert isinstance(ax, ClassAssertion)
        out.setdefault(ax.individual, set()).update(above.get(ax.cls, {ax.cls}))
    return out


def detect_partition_errors(o: Ontology) -> list[Finding]:
    """Classes and individuals caught between disjoint classes."""
    findings = []
    for cls in sorted(unsatisfiable_classes(o)):
        findings.append(
            Finding(
                Category.PARTITION_ERROR,
                (cls,),
                f"{cls.local} is a subclass of two disjoint classes",
            )
        )
    disjoint = disjointness_closure(o)
    for ind, members in sorted(_memberships(o).items()):
        hit = next(
            ((x, y) for x, y in sorted(disjoint) if x in members and y in members), None
        )
        if hit:
            findings.append(
                Finding(
                    Category.PARTITION_ERROR,
                    (ind,),
                    f"{ind.local} belongs to disjoint classes {hit[0].local} and {hit[1].local}",
                )
            )
    return findings


def detect_semantic_inconsistency(o: Ontology) -> list[Finding]:
    """Assertions that contradict domain/range declarations or unsatisfiable classes."""
    disjoint = disjointness_closure(o)
    members = _memberships(o)
    unsat = unsatisfiable_classes(o)

    def clashes(ind: Iri, cls: Iri) -> Iri | None:
        for m in sorted(members.get(ind, set())):
            pair = (m, cls) if m <= cls else (cls, m)
            if pair in disjoint:
                return m
        return None

    findings = []
    domains: dict[Iri, list[Iri]] = {}
    ranges: dict[Iri, list[Iri]] = {}
    for ax in o.axioms:
        if isinstance(ax, Domain):
            domains.setdefault(ax.prop, []).append(ax.cls)
        elif isinstance(ax, Range):
            ranges.setdefault(ax.prop, []).append(ax.cls)
    seen: set[tuple] = set()
    for ax in o.axioms_of(PropertyAssertion):
        assert isinstance(ax, PropertyAssertion)
        for dom in domains.get(ax.prop, ()):
            bad = clashes(ax.subject, dom)
            if bad and ("d", ax.subject, ax.prop) not in seen:
                seen.add(("d", ax.subject, ax.prop))
                findings.append(
                    Finding(
                        Category.SEMANTIC_INCONSISTENCY,
                        (ax.subject, ax.prop),
                        f"subject {ax.subject.local} of {ax.prop.local} is a "
                        f"{bad.local}, disjoint with declared domain {dom.local}",
                    )
                )
        for rng in ranges.get(ax.prop, ()):
            bad = clashes(ax.object, rng)
            if bad and ("r", ax.object, ax.prop) not in seen:
                seen.add(("r", ax.object, ax.prop))
                findings.append(
                    Finding(
                        Category.SEMANTIC_INCONSISTENCY,
                        (ax.object, ax.prop),
                        f"object {ax.object.local} of {ax.prop.local} is a "
                        f"{bad.local}, disjoint with declared range {rng.local}",
                    )
                )
    for ax in o.axioms_of(ClassAssertion):
        assert isinstance(ax, ClassAssertion)
        if ax.cls in unsat:
            findings.append(
                Finding(
                    Category.SEMANTIC_INCONSISTENCY,
                    (ax.individual, ax.cls),
                    f"{ax.individual.local} is asserted into unsatisfiable class {ax.cls.local}",
                )
            )
    return findings


def detect_incompleteness(o: Ontology) -> list[Finding]:
    """Bare classes and subclass partitions without any disjointness."""
    findings = []
    mentioned = {i for ax in o.axioms for i in axiom_iris(ax)}
    for ent in o.entities:
        if ent.kind is EntityKind.CLASS and ent.iri not in mentioned and not ent.labels:
            findings.append(
                Finding(
                    Category.INCOMPLETE_SPECIFICATION,
                    (ent.iri,),
                    f"{ent.iri.local} is declared but never described",
                )
            )
    children: dict[Iri, set[Iri]] = {}
    for ax in o.axioms_of(SubClassOf):
        assert isinstance(ax, SubClassOf)
        if ax.sub != ax.sup:
            children.setdefault(ax.sup, set()).add(ax.sub)
    disjoint = disjointness_closure(o)
    for parent, subs in sorted(children.items()):
        if len(subs) < 2:
            continue
        ordered = sorted(subs)
        any_disjoint = any(
            ((a, b) if a <= b else (b, a)) in disjoint
            for i, a in enumerate(ordered)
            for b in ordered[i + 1 :]
        )
        if not any_disjoint:
            findings.append(
                Finding(
                    Category.PARTITION_OMISSION,
                    (parent,),
                    f"no disjointness declared among the {len(subs)} subclasses of {parent.local}",
                )
            )
    return findings


def _closure_without(o: Ontology, dropped: Axiom) -> frozenset[tuple[Iri, Iri]]:
    remaining = tuple(ax for ax in o.axioms if ax != dropped)
    return subsumption_closure(Ontology(o.id, o.entities, remaining))


def redundant_subsumptions(o: Ontology) -> list[SubClassOf]:
    """SubClassOf axioms still entailed when removed."""
    out = []
    for ax in o.axioms_of(SubClassOf):
        assert isinstance(ax, SubClassOf)
        if (ax.sub, ax.sup) in _closure_without(o, ax):
            out.append(ax)
    return out


def redundant_instantiations(o: Ontology) -> list[ClassAssertion]:
    """ClassAssertions implied by another assertion into a strict subclass."""
    closure = subsumption_closure(o)
    asserted: dict[Iri, set[Iri]] = {}
    for ax in o.axioms_of(ClassAssertion):
        assert isinstance(ax, ClassAssertion)
        asserted.setdefault(ax.individual, set()).add(ax.cls)
    out = []
    for ax in o.axioms_of(ClassAssertion):
        assert isinstance(ax, ClassAssertion)
        for other in asserted.get(ax.individual, ()):
            strictly_below = (
                other != ax.cls
                and (other, ax.cls) in closure
                and (ax.cls, other) not in closure
            )
            if strictly_below:
                out.append(ax)
                break
    return out


_SELF = Iri("http://ontmed.local/lint#", "self")


def _rename(ax: Axiom, target: Iri) -> Axiom:
    def m(i: Iri) -> Iri:
        return _SELF if i == target else i

    if isinstance(ax, SubClassOf):
        return SubClassOf(m(ax.sub), m(ax.sup))
    if isinstance(ax, EquivalentClasses):
        return EquivalentClasses(m(ax.a), m(ax.b))
    if isinstance(ax, DisjointClasses):
        return DisjointClasses(m(ax.a), m(ax.b))
    if isinstance(ax, Domain):
        return Domain(ax.prop, m(ax.cls))
    if isinstance(ax, Range):
        return Range(ax.prop, m(ax.cls))
    if isinstance(ax, ClassAssertion):
        return ClassAssertion(ax.individual, m(ax.cls))
    return ax


def detect_redundancy(o: Ontology) -> list[Finding]:
    findings = []
    for ax in redundant_subsumptions(o):
        findings.append(
            Finding(
                Category.REDUNDANT_SUBSUMPTION,
                (ax.sub, ax.sup),
                f"{ax.sub.local} under {ax.sup.local} is already entailed",
            )
        )
    for ax in redundant_instantiations(o):
        findings.append(
            Finding(
                Category.REDUNDANT_INSTANTIATION,
                (ax.individual, ax.cls),
                f"{ax.individual.local} in {ax.cls.local} follows from a more specific assertion",
            )
        )
    renamed: dict[Iri, frozenset[Axiom]] = {}
    for cls in o.classes():
        mentioned = frozenset(_rename(ax, cls) for ax in o.axioms if cls in axiom_iris(ax))
        if mentioned:
            renamed[cls] = mentioned
    ordered = sorted(renamed)
    for i, a in enumerate(ordered):
        for b in ordered[i + 1 :]:
            if renamed[a] == renamed[b]:
                findings.append(
                    Finding(
                        Category.DUPLICATE_DEFINITION,
                        (a, b),
                        f"{a.local} and {b.local} have identical definitions",
                    )
                )
    return findings


def detect_design_anomalies(
    o: Ontology,
    chain_length: int = DEFAULT_CHAIN_LENGTH,
    clump_size: int = DEFAULT_CLUMP_SIZE,
) -> list[Finding]:
    if chain_length < 2 or clump_size < 2:
        raise ValueError("chain_length and clump_size must be at least 2")
    findings = []
    parents: dict[Iri, set[Iri]] = {c: set() for c in o.classes()}
    kids: dict[Iri, set[Iri]] = {c: set() for c in o.classes()}
    for ax in o.axioms_of(SubClassOf):
        assert isinstance(ax, SubClassOf)
        parents[ax.sub].add(ax.sup)
        kids[ax.sup].add(ax.sub)

    instantiated = {
        ax.cls for ax in o.axioms_of(ClassAssertion) if isinstance(ax, ClassAssertion)
    }
    in_property_axiom = {
        ax.cls for ax in o.axioms if isinstance(ax, (Domain, Range))
    }
    for ent in o.entities:
        if ent.kind is not EntityKind.CLASS:
            continue
        cls = ent.iri
        if (
            not kids[cls]
            and cls not in instantiated
            and cls not in in_property_axiom
            and not ent.labels
        ):
            findings.append(
                Finding(
                    Category.LAZY_CONCEPT,
                    (cls,),
                    f"leaf class {cls.local} has no instances, no property use, no label",
                )
            )

    mention_count: dict[Iri, int] = {}
    for ax in o.axioms:
        for iri in set(axiom_iris(ax)):
            mention_count[iri] = mention_count.get(iri, 0) + 1
    subclass_mentions: dict[Iri, int] = {}
    for ax in o.axioms_of(SubClassOf):
        for iri in set(axiom_iris(ax)):
            subclass_mentions[iri] = subclass_mentions.get(iri, 0) + 1

    def interior(cls: Iri) -> bool:
        return (
            len(parents[cls]) == 1
            and len(kids[cls]) == 1
            and mention_count.get(cls, 0) == subclass_mentions.get(cls, 0)
        )

    visited: set[Iri] = set()
    for cls in sorted(c for c in o.classes() if interior(c)):
        if cls in visited:
            continue
        run = [cls]
        visited.add(cls)
        below = next(iter(kids[cls]))
        while interior(below) and below not in visited:
            visited.add(below)
            run.insert(0, below)
            below = next(iter(kids[below]))
        start = below
        above = next(iter(parents[run[-1]]))
        while interior(above) and above not in visited:
            visited.add(above)
            run.append(above)
            above = next(iter(parents[above]))
        end = above
        if start in visited or end in visited:
            continue  # the run closes a cycle; circulatory findings cover it
        chain = [start, *run, end]
        if len(chain) - 1 >= chain_length:
            names = " < ".join(c.local for c in chain)
            findings.append(
                Finding(
                    Category.CHAIN_OF_INHERITANCE,
                    tuple(chain),
                    f"inheritance chain {names} has no other structure",
                )
            )

    for ax in o.axioms_of(DisjointClasses):
        assert isinstance(ax, DisjointClasses)
        if ax.a != ax.b and not (parents[ax.a] & parents[ax.b]):
            findings.append(
                Finding(
                    Category.LONELY_DISJOINT,
                    (ax.a, ax.b),
                    f"disjoint classes {ax.a.local} and {ax.b.local} share no direct superclass",
                )
            )

    domain_sets: dict[Iri, set[Iri]] = {}
    for ax in o.axioms:
        if isinstance(ax, Domain):
            domain_sets.setdefault(ax.prop, set()).add(ax.cls)
    by_domains: dict[frozenset[Iri], list[Iri]] = {}
    for prop, doms in domain_sets.items():
        by_domains.setdefault(frozenset(doms), []).append(prop)
    for doms, props in sorted(by_domains.items(), key=lambda kv: sorted(kv[1])):
        if len(doms) >= 2 and len(props) >= clump_size:
            ordered_props = tuple(sorted(props))
            names = ", ".join(p.local for p in ordered_props)
            findings.append(
                Finding(
                    Category.PROPERTY_CLUMP,
                    ordered_props,
                    f"properties {names} share the identical domain set",
                )
            )
    return findings


def repair_redundancies(o: Ontology) -> tuple[Ontology, list[Axiom]]:
    """Drop redundant subsumptions and instantiations; the closure is unchanged.

    Subsumptions are removed one at a time (re-deriving after each removal)
    so that parallel entailment paths through declared equivalences cannot
    both disappear.
    """
    cycles = detect_circulatory(o)
    if cycles:
        raise RepairPreconditionError(cycles)
    removed: list[Axiom] = []
    current = o
    while True:
        redundant = redundant_subsumptions(current)
        if not redundant:
            break
        victim = min(redundant, key=axiom_sort_key)
        removed.append(victim)
        current = Ontology(
            current.id, current.entities, tuple(ax for ax in current.axioms if ax != victim)
        )
    dropped_assertions = redundant_instantiations(current)
    if dropped_assertions:
        removed.extend(sorted(dropped_assertions, key=axiom_sort_key))
        keep = tuple(ax for ax in current.axioms if ax not in set(dropped_assertions))
        current = Ontology(current.id, current.entities, keep)
    return current, removed


def lint(
    o: Ontology,
    chain_length: int = DEFAULT_CHAIN_LENGTH,
    clump_size: int = DEFAULT_CLUMP_SIZE,
) -> QualityReport:
    """Run every detector and assemble the canonical report."""
    findings: list[Finding] = []
    findings.extend(detect_circulatory(o))
    findings.extend(detect_partition_errors(o))
    findings.extend(detect_semantic_inconsistency(o))
    findings.extend(detect_incompleteness(o))
    findings.extend(detect_redundancy(o))
    findings.extend(detect_design_anomalies(o, chain_length, clump_size))
    return QualityReport(o.id, tuple(findings))
