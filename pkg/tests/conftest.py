from __future__ import annotations

import random
from pathlib import Path

import pytest

from ontmed.model import (
    ClassAssertion,
    DisjointClasses,
    Entity,
    EntityKind,
    EquivalentClasses,
    Iri,
    Ontology,
    PropertyAssertion,
    SubClassOf,
    SubPropertyOf,
)

CORPUS_DIR = Path(__file__).resolve().parent.parent / "corpus"

TEST_NS = "http://test.example.org/onto#"


def iri(local: str, ns: str = TEST_NS) -> Iri:
    return Iri(ns, local)


def cls_entities(*locals_: str, ns: str = TEST_NS) -> list[Entity]:
    return [Entity(EntityKind.CLASS, iri(name, ns)) for name in locals_]


def ind_entities(*locals_: str, ns: str = TEST_NS) -> list[Entity]:
    return [Entity(EntityKind.INDIVIDUAL, iri(name, ns)) for name in locals_]


def prop_entities(*locals_: str, ns: str = TEST_NS) -> list[Entity]:
    return [Entity(EntityKind.OBJECT_PROPERTY, iri(name, ns)) for name in locals_]


def ontology(ns: str = TEST_NS, entities=(), axioms=(), id_local: str = "onto") -> Ontology:
    oid = Iri.parse(ns[:-1]) if ns.endswith(("#", "/")) else Iri.parse(ns)
    del id_local
    return Ontology(oid, tuple(entities), tuple(axioms))


def random_class_ontology(
    rng: random.Random,
    max_classes: int = 12,
    max_axioms: int = 25,
    ns: str = TEST_NS,
    allow_cycles: bool = True,
    with_individuals: bool = False,
) -> Ontology:
    """A random TBox over class names C0..Cn, optionally with an ABox."""
    n = rng.randint(1, max_classes)
    names = [f"C{k}" for k in range(n)]
    entities = cls_entities(*names, ns=ns)
    classes = [e.iri for e in entities]
    axioms: set = set()
    order = list(range(n))
    rng.shuffle(order)
    rank = {classes[v]: pos for pos, v in enumerate(order)}
    for _ in range(rng.randint(0, max_axioms)):
        a, b = rng.choice(classes), rng.choice(classes)
        roll = rng.random()
        if roll < 0.70:
            if not allow_cycles:
                if a == b:
                    continue
                if rank[a] > rank[b]:
                    a, b = b, a
            axioms.add(SubClassOf(a, b))
        elif roll < 0.85:
            if a != b:
                axioms.add(EquivalentClasses(a, b))
        else:
            if a != b:
                axioms.add(DisjointClasses(a, b))
    if with_individuals:
        inds = ind_entities(*[f"i{k}" for k in range(rng.randint(0, 6))], ns=ns)
        entities = entities + inds
        for ent in inds:
            for _ in range(rng.randint(0, 3)):
                axioms.add(ClassAssertion(ent.iri, rng.choice(classes)))
    return ontology(ns=ns, entities=entities, axioms=axioms)


def random_dag_ontology(rng: random.Random, max_classes: int = 12, max_axioms: int = 25) -> Ontology:
    """Acyclic SubClassOf graph (plus occasional equivalences and an ABox)."""
    return random_class_ontology(
        rng, max_classes, max_axioms, allow_cycles=False, with_individuals=True
    )


# ---------------------------------------------------------------- oracles

def reachability_oracle(o: Ontology) -> frozenset[tuple[Iri, Iri]]:
    """Floyd-Warshall reflexive reachability over SubClassOf + equivalence edges."""
    classes = list(o.classes())
    index = {c: k for k, c in enumerate(classes)}
    n = len(classes)
    reach = [[i == j for j in range(n)] for i in range(n)]
    for ax in o.axioms:
        if isinstance(ax, SubClassOf):
            reach[index[ax.sub]][index[ax.sup]] = True
        elif isinstance(ax, EquivalentClasses):
            reach[index[ax.a]][index[ax.b]] = True
            reach[index[ax.b]][index[ax.a]] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                row_k = reach[k]
                row_i = reach[i]
                for j in range(n):
                    if row_k[j]:
                        row_i[j] = True
    return frozenset(
        (classes[i], classes[j]) for i in range(n) for j in range(n) if reach[i][j]
    )


def disjointness_oracle(o: Ontology) -> frozenset[tuple[Iri, Iri]]:
    """Brute force over all class pairs against the defining condition."""
    reach = reachability_oracle(o)
    declared = [ax for ax in o.axioms if isinstance(ax, DisjointClasses)]
    pairs = set()
    for x in o.classes():
        for y in o.classes():
            for ax in declared:
                if ((x, ax.a) in reach and (y, ax.b) in reach) or (
                    (x, ax.b) in reach and (y, ax.a) in reach
                ):
                    pairs.add((x, y) if x <= y else (y, x))
    return frozenset(pairs)


def unsat_oracle(o: Ontology) -> frozenset[Iri]:
    reach = reachability_oracle(o)
    disjoint = disjointness_oracle(o)
    out = set()
    for c in o.classes():
        for x, y in disjoint:
            if (c, x) in reach and (c, y) in reach:
                out.add(c)
                break
    return frozenset(out)


def scc_oracle(nodes, edges) -> list[frozenset]:
    """Kosaraju two-pass strongly connected components."""
    fwd: dict = {n: [] for n in nodes}
    rev: dict = {n: [] for n in nodes}
    for a, b in edges:
        fwd[a].append(b)
        rev[b].append(a)
    seen: set = set()
    order: list = []
    for start in nodes:
        if start in seen:
            continue
        stack = [(start, iter(fwd[start]))]
        seen.add(start)
        while stack:
            node, it = stack[-1]
            advanced = False
            for nxt in it:
                if nxt not in seen:
                    seen.add(nxt)
                    stack.append((nxt, iter(fwd[nxt])))
                    advanced = True
                    break
            if not advanced:
                order.append(node)
                stack.pop()
    assigned: set = set()
    comps: list[frozenset] = []
    for start in reversed(order):
        if start in assigned:
            continue
        comp = {start}
        assigned.add(start)
        stack = [start]
        while stack:
            node = stack.pop()
            for nxt in rev[node]:
                if nxt not in assigned:
                    assigned.add(nxt)
                    comp.add(nxt)
                    stack.append(nxt)
        comps.append(frozenset(comp))
    return comps


def materialization_oracle(query, merged, stores) -> frozenset:
    """Pool every fact under the merged ontology and evaluate the query directly.

    Memberships are closed upward through the subsumption closure and
    property assertions upward through the subproperty closure, then all
    variable assignments over the pooled individuals are enumerated.
    """
    from ontmed.mediate import ClassAtom, PropertyAtom, Variable
    from ontmed.model import subproperty_closure, subsumption_closure

    class_facts = set()
    prop_facts = set()
    for store in stores:
        for ind, cls in store.class_assertions:
            class_facts.add(
                (merged.global_of(store.source, ind), merged.global_of(store.source, cls))
            )
        for s, p, o in store.property_assertions:
            prop_facts.add(
                (
                    merged.global_of(store.source, s),
                    merged.global_of(store.source, p),
                    merged.global_of(store.source, o),
                )
            )
    class_closure = subsumption_closure(merged.global_ontology)
    for ind, cls in list(class_facts):
        for sub, sup in class_closure:
            if sub == cls:
                class_facts.add((ind, sup))
    prop_closure = subproperty_closure(merged.global_ontology)
    for s, p, o in list(prop_facts):
        for sub, sup in prop_closure:
            if sub == p:
                prop_facts.add((s, sup, o))

    individuals = sorted(
        {i for i, _ in class_facts} | {x for s, _, o in prop_facts for x in (s, o)}
    )
    variables = [v.name for v in query.variables()]
    results = set()

    def assign(k: int, binding: dict) -> None:
        if k == len(variables):
            for atom in query.atoms:
                if isinstance(atom, ClassAtom):
                    term = binding[atom.term.name] if isinstance(atom.term, Variable) else atom.term
                    if (term, atom.cls) not in class_facts:
                        return
                else:
                    s = (
                        binding[atom.subject.name]
                        if isinstance(atom.subject, Variable)
                        else atom.subject
                    )
                    o = (
                        binding[atom.object.name]
                        if isinstance(atom.object, Variable)
                        else atom.object
                    )
                    if (s, atom.prop, o) not in prop_facts:
                        return
            results.add(tuple(binding[v] for v in query.select_vars))
            return
        for ind in individuals:
            binding[variables[k]] = ind
            assign(k + 1, binding)
        binding.pop(variables[k], None)

    assign(0, {})
    return frozenset(results)


def random_federation(rng: random.Random, max_sources: int = 3):
    """Sources with stores, a merged ontology, and queries in global vocabulary."""
    from ontmed.align import Alignment, Correspondence, Relation
    from ontmed.mediate import ClassAtom, ConjunctiveQuery, PropertyAtom, Variable, build_store
    from ontmed.merge import merge
    from ontmed.model import EntityKind as EK, unsatisfiable_classes

    n_sources = rng.randint(1, max_sources)
    sources = []
    for s in range(n_sources):
        ns = f"http://fed{s}.example.org/onto#"
        n_classes = rng.randint(1, 10)
        classes = cls_entities(*[f"C{k}" for k in range(n_classes)], ns=ns)
        props = prop_entities(*[f"p{k}" for k in range(rng.randint(0, 3))], ns=ns)
        inds = ind_entities(*[f"i{k}" for k in range(rng.randint(1, 6))], ns=ns)
        class_iris = [e.iri for e in classes]
        prop_iris = [e.iri for e in props]
        ind_iris = [e.iri for e in inds]
        axioms: set = set()
        order = list(range(n_classes))
        rng.shuffle(order)
        rank = {class_iris[v]: pos for pos, v in enumerate(order)}
        for _ in range(rng.randint(0, 8)):
            a, b = rng.choice(class_iris), rng.choice(class_iris)
            if a == b:
                continue
            if rank[a] > rank[b]:
                a, b = b, a
            axioms.add(SubClassOf(a, b))
        for _ in range(rng.randint(0, 2)):
            if len(prop_iris) >= 2:
                p, q = rng.sample(prop_iris, 2)
                axioms.add(SubPropertyOf(p, q))
        n_facts = rng.randint(0, 20)
        for _ in range(n_facts):
            if prop_iris and rng.random() < 0.4:
                axioms.add(
                    PropertyAssertion(
                        rng.choice(ind_iris), rng.choice(prop_iris), rng.choice(ind_iris)
                    )
                )
            else:
                axioms.add(ClassAssertion(rng.choice(ind_iris), rng.choice(class_iris)))
        sources.append(ontology(ns=ns, entities=classes + props + inds, axioms=axioms))

    alignments = []
    for i in range(len(sources)):
        for j in range(i + 1, len(sources)):
            corrs = []
            used1: set = set()
            used2: set = set()
            for kind in (EK.CLASS, EK.OBJECT_PROPERTY, EK.INDIVIDUAL):
                e1s = [e.iri for e in sources[i].entities if e.kind is kind]
                e2s = [e.iri for e in sources[j].entities if e.kind is kind]
                for _ in range(rng.randint(0, 3)):
                    if not e1s or not e2s:
                        continue
                    a, b = rng.choice(e1s), rng.choice(e2s)
                    if a in used1 or b in used2:
                        continue
                    used1.add(a)
                    used2.add(b)
                    if kind is not EK.INDIVIDUAL and rng.random() < 0.2:
                        rel = rng.choice([Relation.SUBSUMES, Relation.SUBSUMED_BY])
                    else:
                        rel = Relation.EQUIVALENT
                    corrs.append(Correspondence(a, b, rel, round(rng.uniform(0.5, 1.0), 3)))
            alignments.append(Alignment(sources[i].id, sources[j].id, tuple(corrs)))

    merged = merge(sources, alignments)
    stores = [build_store(o) for o in sources]

    unsat = unsatisfiable_classes(merged.global_ontology)
    global_classes = [c for c in merged.global_ontology.classes() if c not in unsat]
    global_props = list(merged.global_ontology.object_properties())
    queries = []
    if global_classes:
        for q in range(rng.randint(1, 3)):
            atoms = []
            n_atoms = rng.randint(1, 3)
            var_names = ["x", "y"]
            for _ in range(n_atoms):
                if global_props and rng.random() < 0.45:
                    atoms.append(
                        PropertyAtom(
                            Variable(rng.choice(var_names)),
                            rng.choice(global_props),
                            Variable(rng.choice(var_names)),
                        )
                    )
                else:
                    atoms.append(
                        ClassAtom(Variable(rng.choice(var_names)), rng.choice(global_classes))
                    )
            body_vars = []
            for atom in atoms:
                terms = (atom.term,) if isinstance(atom, ClassAtom) else (atom.subject, atom.object)
                body_vars.extend(t.name for t in terms if isinstance(t, Variable))
            opts = sorted(set(body_vars))
            select = sorted(rng.sample(opts, rng.randint(1, len(opts))))
            queries.append(ConjunctiveQuery(f"q{q}", tuple(select), tuple(atoms)))
    return sources, alignments, merged, stores, queries


def levenshtein_oracle(a: str, b: str) -> int:
    """Recursive memoized edit distance, independent of the production DP."""
    from functools import lru_cache

    @lru_cache(maxsize=None)
    def dist(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        return min(
            dist(i - 1, j) + 1,
            dist(i, j - 1) + 1,
            dist(i - 1, j - 1) + (a[i - 1] != b[j - 1]),
        )

    return dist(len(a), len(b))


@pytest.fixture
def rng() -> random.Random:
    return random.Random(0xA11CE)
