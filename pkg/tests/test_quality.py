from __future__ import annotations

import pytest

from ontmed.docio import serialize_report
from ontmed.model import (
    ClassAssertion,
    DisjointClasses,
    Domain,
    EquivalentClasses,
    Ontology,
    PropertyAssertion,
    Range,
    SubClassOf,
    subsumption_closure,
)
from ontmed.quality import (
    Category,
    Finding,
    RepairPreconditionError,
    SEVERITY_BY_CATEGORY,
    Severity,
    detect_circulatory,
    detect_design_anomalies,
    detect_incompleteness,
    detect_partition_errors,
    detect_redundancy,
    detect_semantic_inconsistency,
    lint,
    repair_redundancies,
)

from conftest import (
    cls_entities,
    ind_entities,
    iri,
    ontology,
    prop_entities,
    random_class_ontology,
    random_dag_ontology,
    scc_oracle,
)


def by_category(findings, category):
    return [f for f in findings if f.category is category]


def test_severity_mapping_is_total():
    assert set(SEVERITY_BY_CATEGORY) == set(Category)
    for category, severity in SEVERITY_BY_CATEGORY.items():
        assert Finding(category, (iri("A"),), "x").severity is severity


# ------------------------------------------------------------- circulatory

def test_circulatory_dag_is_clean():
    o = ontology(
        entities=cls_entities("A", "B", "C"),
        axioms=[SubClassOf(iri("A"), iri("B")), SubClassOf(iri("B"), iri("C"))],
    )
    assert detect_circulatory(o) == []


def test_circulatory_two_cycle():
    o = ontology(
        entities=cls_entities("A", "B"),
        axioms=[SubClassOf(iri("A"), iri("B")), SubClassOf(iri("B"), iri("A"))],
    )
    (finding,) = detect_circulatory(o)
    assert finding.entities == (iri("A"), iri("B"))
    assert finding.severity is Severity.ERROR


def test_circulatory_three_cycle_with_tail():
    o = ontology(
        entities=cls_entities("A", "B", "C", "D"),
        axioms=[
            SubClassOf(iri("A"), iri("B")),
            SubClassOf(iri("B"), iri("C")),
            SubClassOf(iri("C"), iri("A")),
            SubClassOf(iri("D"), iri("A")),
        ],
    )
    (finding,) = detect_circulatory(o)
    assert finding.entities == (iri("A"), iri("B"), iri("C"))


def test_circulatory_self_loop():
    o = ontology(entities=cls_entities("A"), axioms=[SubClassOf(iri("A"), iri("A"))])
    (finding,) = detect_circulatory(o)
    assert finding.entities == (iri("A"),)


def test_circulatory_ignores_equivalence_cycles():
    o = ontology(
        entities=cls_entities("A", "B"),
        axioms=[EquivalentClasses(iri("A"), iri("B"))],
    )
    assert detect_circulatory(o) == []


def test_circulatory_matches_scc_oracle(rng):
    for _ in range(150):
        o = random_class_ontology(rng, max_classes=10, max_axioms=20)
        edges = [
            (ax.sub, ax.sup)
            for ax in o.axioms
            if isinstance(ax, SubClassOf)
        ]
        expected = {
            frozenset(c) for c in scc_oracle(list(o.classes()), edges) if len(c) >= 2
        }
        got = {
            frozenset(f.entities)
            for f in detect_circulatory(o)
            if len(f.entities) >= 2
        }
        assert got == expected


# ---------------------------------------------------------------- partition

def test_partition_error_on_common_subclass():
    o = ontology(
        entities=cls_entities("A", "B", "C"),
        axioms=[
            DisjointClasses(iri("A"), iri("B")),
            SubClassOf(iri("C"), iri("A")),
            SubClassOf(iri("C"), iri("B")),
        ],
    )
    findings = detect_partition_errors(o)
    assert [f.entities for f in findings] == [(iri("C"),)]


def test_partition_error_on_individual_in_disjoint_classes():
    o = ontology(
        entities=cls_entities("A", "B") + ind_entities("i"),
        axioms=[
            DisjointClasses(iri("A"), iri("B")),
            ClassAssertion(iri("i"), iri("A")),
            ClassAssertion(iri("i"), iri("B")),
        ],
    )
    findings = detect_partition_errors(o)
    assert [f.entities for f in findings] == [(iri("i"),)]


def test_partition_error_via_inherited_membership():
    o = ontology(
        entities=cls_entities("A", "B", "C") + ind_entities("i"),
        axioms=[
            DisjointClasses(iri("A"), iri("B")),
            SubClassOf(iri("C"), iri("A")),
            ClassAssertion(iri("i"), iri("C")),
            ClassAssertion(iri("i"), iri("B")),
        ],
    )
    findings = detect_partition_errors(o)
    assert (iri("i"),) in [f.entities for f in findings]


# ------------------------------------------------------ semantic consistency

def test_semantic_inconsistency_domain_clash():
    o = ontology(
        entities=cls_entities("Person", "Paper") + prop_entities("writes") + ind_entities("s", "x"),
        axioms=[
            Domain(iri("writes"), iri("Person")),
            DisjointClasses(iri("Person"), iri("Paper")),
            ClassAssertion(iri("s"), iri("Paper")),
            PropertyAssertion(iri("s"), iri("writes"), iri("x")),
        ],
    )
    findings = detect_semantic_inconsistency(o)
    assert [f.entities for f in findings] == [(iri("s"), iri("writes"))]


def test_semantic_inconsistency_none_without_domain_or_range():
    o = ontology(
        entities=cls_entities("Person") + prop_entities("writes") + ind_entities("s", "x"),
        axioms=[PropertyAssertion(iri("s"), iri("writes"), iri("x"))],
    )
    assert detect_semantic_inconsistency(o) == []


def test_semantic_inconsistency_range_clash():
    o = ontology(
        entities=cls_entities("Paper", "Review") + prop_entities("writes") + ind_entities("s", "v"),
        axioms=[
            Range(iri("writes"), iri("Paper")),
            DisjointClasses(iri("Paper"), iri("Review")),
            ClassAssertion(iri("v"), iri("Review")),
            PropertyAssertion(iri("s"), iri("writes"), iri("v")),
        ],
    )
    findings = detect_semantic_inconsistency(o)
    assert [f.entities for f in findings] == [(iri("v"), iri("writes"))]


def test_semantic_inconsistency_assertion_into_unsatisfiable_class():
    o = ontology(
        entities=cls_entities("A", "B", "C") + ind_entities("i"),
        axioms=[
            DisjointClasses(iri("A"), iri("B")),
            SubClassOf(iri("C"), iri("A")),
            SubClassOf(iri("C"), iri("B")),
            ClassAssertion(iri("i"), iri("C")),
        ],
    )
    findings = detect_semantic_inconsistency(o)
    assert (iri("i"), iri("C")) in [f.entities for f in findings]


# ----------------------------------------------------------- incompleteness

def test_incomplete_specification_for_bare_class():
    o = ontology(entities=cls_entities("Q", "R"), axioms=[SubClassOf(iri("R"), iri("R"))])
    findings = by_category(detect_incompleteness(o), Category.INCOMPLETE_SPECIFICATION)
    assert [f.entities for f in findings] == [(iri("Q"),)]


def test_labelled_bare_class_is_not_incomplete():
    from ontmed.model import Entity, EntityKind

    o = ontology(entities=[Entity(EntityKind.CLASS, iri("Q"), frozenset(["quality"]))])
    assert detect_incompleteness(o) == []


def test_partition_omission_fires_only_without_any_disjoint_pair():
    base = cls_entities("P", "A", "B", "C")
    axioms = [
        SubClassOf(iri("A"), iri("P")),
        SubClassOf(iri("B"), iri("P")),
        SubClassOf(iri("C"), iri("P")),
    ]
    o = ontology(entities=base, axioms=axioms)
    findings = by_category(detect_incompleteness(o), Category.PARTITION_OMISSION)
    assert [f.entities for f in findings] == [(iri("P"),)]

    o = ontology(entities=base, axioms=axioms + [DisjointClasses(iri("A"), iri("B"))])
    assert by_category(detect_incompleteness(o), Category.PARTITION_OMISSION) == []


def test_partition_omission_two_disjoint_subclasses_clean():
    o = ontology(
        entities=cls_entities("P", "A", "B"),
        axioms=[
            SubClassOf(iri("A"), iri("P")),
            SubClassOf(iri("B"), iri("P")),
            DisjointClasses(iri("A"), iri("B")),
        ],
    )
    assert by_category(detect_incompleteness(o), Category.PARTITION_OMISSION) == []


# --------------------------------------------------------------- redundancy

def test_redundant_subsumption_transitive_edge():
    o = ontology(
        entities=cls_entities("A", "B", "C"),
        axioms=[
            SubClassOf(iri("A"), iri("B")),
            SubClassOf(iri("B"), iri("C")),
            SubClassOf(iri("A"), iri("C")),
        ],
    )
    findings = by_category(detect_redundancy(o), Category.REDUNDANT_SUBSUMPTION)
    assert [f.entities for f in findings] == [(iri("A"), iri("C"))]


def test_transitive_reduction_input_is_clean():
    o = ontology(
        entities=cls_entities("A", "B", "C"),
        axioms=[SubClassOf(iri("A"), iri("B")), SubClassOf(iri("B"), iri("C"))],
    )
    assert detect_redundancy(o) == []


def test_redundant_instantiation():
    o = ontology(
        entities=cls_entities("B", "C") + ind_entities("i"),
        axioms=[
            SubClassOf(iri("C"), iri("B")),
            ClassAssertion(iri("i"), iri("C")),
            ClassAssertion(iri("i"), iri("B")),
        ],
    )
    findings = by_category(detect_redundancy(o), Category.REDUNDANT_INSTANTIATION)
    assert [f.entities for f in findings] == [(iri("i"), iri("B"))]


def test_duplicate_definition_detected_and_disjoint_siblings_spared():
    o = ontology(
        entities=cls_entities("C", "D", "P"),
        axioms=[SubClassOf(iri("C"), iri("P")), SubClassOf(iri("D"), iri("P"))],
    )
    findings = by_category(detect_redundancy(o), Category.DUPLICATE_DEFINITION)
    assert [f.entities for f in findings] == [(iri("C"), iri("D"))]

    o = ontology(
        entities=cls_entities("C", "D", "P"),
        axioms=[
            SubClassOf(iri("C"), iri("P")),
            SubClassOf(iri("D"), iri("P")),
            DisjointClasses(iri("C"), iri("D")),
        ],
    )
    assert by_category(detect_redundancy(o), Category.DUPLICATE_DEFINITION) == []


# ---------------------------------------------------------- design anomalies

def test_lazy_concept_vs_instantiated_leaf():
    o = ontology(
        entities=cls_entities("Leaf", "Root") + ind_entities("i"),
        axioms=[
            SubClassOf(iri("Leaf"), iri("Root")),
            ClassAssertion(iri("i"), iri("Leaf")),
        ],
    )
    assert by_category(detect_design_anomalies(o), Category.LAZY_CONCEPT) == []

    o = ontology(
        entities=cls_entities("Leaf", "Root"),
        axioms=[SubClassOf(iri("Leaf"), iri("Root"))],
    )
    findings = by_category(detect_design_anomalies(o), Category.LAZY_CONCEPT)
    assert [f.entities for f in findings] == [(iri("Leaf"),)]


def test_chain_of_inheritance_detected_at_length_three():
    o = ontology(
        entities=cls_entities("A", "B", "C", "D"),
        axioms=[
            SubClassOf(iri("A"), iri("B")),
            SubClassOf(iri("B"), iri("C")),
            SubClassOf(iri("C"), iri("D")),
        ],
    )
    findings = by_category(
        detect_design_anomalies(o, chain_length=3), Category.CHAIN_OF_INHERITANCE
    )
    assert [f.entities for f in findings] == [(iri("A"), iri("B"), iri("C"), iri("D"))]
    assert (
        by_category(detect_design_anomalies(o, chain_length=4), Category.CHAIN_OF_INHERITANCE)
        == []
    )


def test_chain_broken_by_extra_mention():
    o = ontology(
        entities=cls_entities("A", "B", "C", "D") + ind_entities("i"),
        axioms=[
            SubClassOf(iri("A"), iri("B")),
            SubClassOf(iri("B"), iri("C")),
            SubClassOf(iri("C"), iri("D")),
            ClassAssertion(iri("i"), iri("B")),  # interior B now carries other structure
        ],
    )
    assert (
        by_category(detect_design_anomalies(o, chain_length=3), Category.CHAIN_OF_INHERITANCE)
        == []
    )


def test_lonely_disjoint_requires_shared_parent():
    o = ontology(
        entities=cls_entities("A", "B", "P"),
        axioms=[
            DisjointClasses(iri("A"), iri("B")),
            SubClassOf(iri("A"), iri("P")),
            SubClassOf(iri("B"), iri("P")),
        ],
    )
    assert by_category(detect_design_anomalies(o), Category.LONELY_DISJOINT) == []

    o = ontology(
        entities=cls_entities("A", "B"),
        axioms=[DisjointClasses(iri("A"), iri("B"))],
    )
    findings = by_category(detect_design_anomalies(o), Category.LONELY_DISJOINT)
    assert [f.entities for f in findings] == [(iri("A"), iri("B"))]


def test_property_clump_on_identical_nonsingleton_domains():
    o = ontology(
        entities=cls_entities("A", "B") + prop_entities("p", "q", "r"),
        axioms=[
            Domain(iri("p"), iri("A")),
            Domain(iri("p"), iri("B")),
            Domain(iri("q"), iri("A")),
            Domain(iri("q"), iri("B")),
            Domain(iri("r"), iri("A")),
            Domain(iri("r"), iri("B")),
        ],
    )
    findings = by_category(detect_design_anomalies(o, clump_size=3), Category.PROPERTY_CLUMP)
    assert [f.entities for f in findings] == [(iri("p"), iri("q"), iri("r"))]
    assert (
        by_category(detect_design_anomalies(o, clump_size=4), Category.PROPERTY_CLUMP) == []
    )


def test_single_domain_properties_never_clump():
    o = ontology(
        entities=cls_entities("A") + prop_entities("p", "q", "r"),
        axioms=[Domain(iri("p"), iri("A")), Domain(iri("q"), iri("A")), Domain(iri("r"), iri("A"))],
    )
    assert by_category(detect_design_anomalies(o), Category.PROPERTY_CLUMP) == []


def test_design_anomaly_thresholds_validated():
    o = ontology(entities=cls_entities("A"))
    with pytest.raises(ValueError):
        detect_design_anomalies(o, chain_length=1)


# ------------------------------------------------------------------- repair

def test_repair_removes_transitive_edge():
    o = ontology(
        entities=cls_entities("A", "B", "C"),
        axioms=[
            SubClassOf(iri("A"), iri("B")),
            SubClassOf(iri("B"), iri("C")),
            SubClassOf(iri("A"), iri("C")),
        ],
    )
    repaired, removed = repair_redundancies(o)
    assert removed == [SubClassOf(iri("A"), iri("C"))]
    assert subsumption_closure(repaired) == subsumption_closure(o)


def test_repair_identity_on_clean_input():
    o = ontology(
        entities=cls_entities("A", "B"),
        axioms=[SubClassOf(iri("A"), iri("B"))],
    )
    repaired, removed = repair_redundancies(o)
    assert repaired == o and removed == []


def test_repair_removes_redundant_instantiation():
    o = ontology(
        entities=cls_entities("B", "C") + ind_entities("i"),
        axioms=[
            SubClassOf(iri("C"), iri("B")),
            ClassAssertion(iri("i"), iri("C")),
            ClassAssertion(iri("i"), iri("B")),
        ],
    )
    repaired, removed = repair_redundancies(o)
    assert removed == [ClassAssertion(iri("i"), iri("B"))]
    assert ClassAssertion(iri("i"), iri("C")) in repaired.axioms


def test_repair_refuses_cyclic_hierarchy():
    o = ontology(
        entities=cls_entities("A", "B"),
        axioms=[SubClassOf(iri("A"), iri("B")), SubClassOf(iri("B"), iri("A"))],
    )
    with pytest.raises(RepairPreconditionError) as excinfo:
        repair_redundancies(o)
    assert excinfo.value.findings
    assert excinfo.value.findings[0].category is Category.CIRCULATORY_ERROR


def test_repair_preserves_closure_on_random_dags(rng):
    for _ in range(120):
        o = random_dag_ontology(rng)
        repaired, _ = repair_redundancies(o)
        assert subsumption_closure(repaired) == subsumption_closure(o)
        leftovers = [
            f
            for f in detect_redundancy(repaired)
            if f.category in (Category.REDUNDANT_SUBSUMPTION, Category.REDUNDANT_INSTANTIATION)
        ]
        assert leftovers == []
        again, removed_again = repair_redundancies(repaired)
        assert again == repaired and removed_again == []


def test_repair_preserves_derivable_memberships(rng):
    for _ in range(40):
        o = random_dag_ontology(rng)
        repaired, _ = repair_redundancies(o)
        closure = subsumption_closure(o)

        def memberships(onto: Ontology) -> set:
            out = set()
            for ax in onto.axioms:
                if isinstance(ax, ClassAssertion):
                    out.update(
                        (ax.individual, sup) for sub, sup in closure if sub == ax.cls
                    )
            return out

        assert memberships(repaired) == memberships(o)


# --------------------------------------------------------------------- lint

def test_lint_clean_ontology_empty_report():
    from ontmed.model import Entity, EntityKind

    o = ontology(
        entities=[
            Entity(EntityKind.CLASS, iri("A"), frozenset(["a"])),
            Entity(EntityKind.CLASS, iri("B"), frozenset(["b"])),
        ]
        + ind_entities("i"),
        axioms=[SubClassOf(iri("A"), iri("B")), ClassAssertion(iri("i"), iri("A"))],
    )
    report = lint(o)
    assert report.findings == ()
    assert report.counts() == {}


def test_lint_combines_detectors_and_sorts():
    o = ontology(
        entities=cls_entities("A", "B", "C", "Q") + ind_entities("i"),
        axioms=[
            SubClassOf(iri("A"), iri("B")),
            SubClassOf(iri("B"), iri("A")),
            DisjointClasses(iri("A"), iri("C")),
            ClassAssertion(iri("i"), iri("A")),
            ClassAssertion(iri("i"), iri("C")),
        ],
    )
    report = lint(o)
    categories = {f.category for f in report.findings}
    assert Category.CIRCULATORY_ERROR in categories
    assert Category.PARTITION_ERROR in categories
    assert Category.INCOMPLETE_SPECIFICATION in categories  # bare class Q
    keys = [(f.category.value, f.entities) for f in report.findings]
    assert keys == sorted(keys)
    assert sum(report.counts().values()) == len(report.findings)


def test_lint_report_is_deterministic(rng):
    for _ in range(20):
        o = random_class_ontology(rng, with_individuals=True)
        first = serialize_report(lint(o))
        second = serialize_report(lint(o))
        assert first == second


def test_findings_reference_only_declared_iris(rng):
    from ontmed.model import signature

    for _ in range(40):
        o = random_class_ontology(rng, with_individuals=True)
        sig = signature(o)
        for finding in lint(o).findings:
            for entity in finding.entities:
                assert entity in sig


def test_report_text_rendering_format():
    o = ontology(
        entities=cls_entities("A", "B"),
        axioms=[SubClassOf(iri("A"), iri("B")), SubClassOf(iri("B"), iri("A"))],
    )
    text = lint(o).render_text()
    line = text.splitlines()[0]
    assert line.startswith("ERROR CirculatoryError ")
    assert " — " in line
