import random

import pytest
from hypothesis import given, settings

from elproofs.ontology import (
    CALCULI,
    TAUTOLOGY,
    Calculus,
    UnknownNameError,
    UnsupportedFeatureError,
    denormalize_axiom,
    is_tautology,
    negative_occurrences,
    normalize,
    role_hierarchy_closure,
)
from elproofs.parser import parse_axiom, parse_tbox
from elproofs.saturation import classify
from elproofs.syntax import (
    BOTTOM,
    TOP,
    ConceptInclusion,
    Equivalence,
    Existential,
    Named,
    RoleChainInclusion,
    RoleInclusion,
    TBox,
    is_atomic,
)

from conftest import random_tbox
from oracle import oracle_classify
from test_parser import axioms


def ax(text):
    return parse_axiom(text)


def test_negative_occurrences_of_example(example_tbox):
    concepts, roles = negative_occurrences(example_tbox)
    assert concepts == {Named("A"), Named("B"), Named("C"), Named("D"), Existential("t", Named("D"))}
    assert roles == {"t"}


def test_negative_occurrences_edge_cases():
    assert negative_occurrences(TBox()) == (set(), set())
    concepts, roles = negative_occurrences(parse_tbox("ObjectPropertyDomain(r C)"))
    assert concepts == {Existential("r", TOP), TOP}
    assert roles == {"r"}
    concepts, _ = negative_occurrences(parse_tbox("EquivalentClasses(A ObjectSomeValuesFrom(r B))"))
    assert concepts == {Named("A"), Named("B"), Existential("r", Named("B"))}


def test_role_hierarchy_examples():
    t = parse_tbox("SubObjectPropertyOf(r s)\nSubObjectPropertyOf(s t)")
    assert role_hierarchy_closure(t, {"t"}) == {("t", "t"), ("s", "t"), ("r", "t")}
    assert role_hierarchy_closure(t, set()) == set()
    t = parse_tbox("SubObjectPropertyOf(r s)\nSubObjectPropertyOf(s t)\nSubObjectPropertyOf(t u)")
    assert role_hierarchy_closure(t, {"u"}) == {("u", "u"), ("t", "u"), ("s", "u"), ("r", "u")}


def test_role_hierarchy_is_transitive_on_random_tboxes():
    rng = random.Random(7)
    for _ in range(100):
        t = random_tbox(rng)
        seeds = set(rng.sample(["r", "s", "t"], rng.randint(0, 3)))
        h = role_hierarchy_closure(t, seeds)
        assert all((a, c) in h for a, b in h for b2, c in h if b == b2)
        assert seeds <= {a for a, b in h if a == b}
        assert all(b in seeds for _, b in h)


def test_long_chain_is_split_left_to_right():
    n = normalize(parse_tbox("SubObjectPropertyOf(ObjectPropertyChain(r s t) u)"), "elk")
    chains = [a for a in n.norm_axioms if isinstance(a, RoleChainInclusion)]
    assert chains == [RoleChainInclusion(("r", "s"), "_R1"), RoleChainInclusion(("_R1", "t"), "u")]
    assert n.alias_roles == {"_R1": ("r", "s")}
    n = normalize(parse_tbox("SubObjectPropertyOf(ObjectPropertyChain(a b c d) e)"), "envelope")
    assert n.alias_roles == {"_R1": ("a", "b"), "_R2": ("a", "b", "c")}


def test_transitivity_becomes_a_chain():
    for calc in ("elk", "envelope"):
        n = normalize(parse_tbox("TransitiveObjectProperty(r)"), calc)
        assert RoleChainInclusion(("r", "r"), "r") in n.norm_axioms


def test_textbook_rejects_chains():
    with pytest.raises(UnsupportedFeatureError):
        normalize(parse_tbox("TransitiveObjectProperty(r)"), "textbook")


def test_normal_axioms_stay_unchanged(example_tbox):
    target = ax("SubClassOf(ObjectSomeValuesFrom(t D) E)")
    for calc in CALCULI:
        n = normalize(example_tbox, calc)
        assert target in n.norm_axioms
        assert not n.alias_concepts
        for name in "ABCDE":
            assert ConceptInclusion(BOTTOM, Named(name)) in n.norm_axioms


def test_fresh_names_are_deterministic_and_shared():
    t = parse_tbox(
        "SubClassOf(ObjectSomeValuesFrom(r ObjectIntersectionOf(C B)) E)\n"
        "SubClassOf(ObjectSomeValuesFrom(s ObjectIntersectionOf(B C)) F)\n"
        "SubClassOf(A ObjectIntersectionOf(C B ObjectSomeValuesFrom(r D)))"
    )
    n1, n2 = normalize(t, "textbook"), normalize(TBox(tuple(reversed(t.axioms))), "textbook")
    assert n1.norm_axioms == n2.norm_axioms and n1.alias_concepts == n2.alias_concepts
    assert list(n1.alias_concepts) == sorted(n1.alias_concepts)
    # B ⊓ C and C ⊓ B share one alias
    images = [str(c) for c in n1.alias_concepts.values()]
    assert images.count("ObjectIntersectionOf(B C)") == 1


def test_fresh_names_avoid_the_signature():
    t = parse_tbox("SubClassOf(_C0001 ObjectIntersectionOf(A ObjectSomeValuesFrom(r B)))")
    n = normalize(t, "textbook")
    assert "_C0001" not in n.alias_concepts


def _has_normal_shape(a) -> bool:
    if isinstance(a, (RoleInclusion, RoleChainInclusion)):
        return True
    lhs, rhs = a.lhs, a.rhs
    if is_atomic(lhs) and is_atomic(rhs):
        return True
    if is_atomic(lhs) and isinstance(rhs, Existential) and is_atomic(rhs.filler):
        return True
    if not is_atomic(rhs):
        return False
    if isinstance(lhs, Existential):
        return is_atomic(lhs.filler)
    return len(lhs.operands) == 2 and all(map(is_atomic, lhs.operands))


def test_normal_form_shapes_on_random_tboxes():
    rng = random.Random(11)
    for i in range(150):
        t = random_tbox(rng, chains=i % 2 == 0)
        for calc in CALCULI:
            try:
                n = normalize(t, calc)
            except UnsupportedFeatureError:
                assert calc is Calculus.TEXTBOOK
                continue
            for a in n.norm_axioms:
                if isinstance(a, RoleChainInclusion):
                    assert len(a.chain) == 2
                else:
                    assert _has_normal_shape(a), a
            for (r, s) in n.role_hierarchy:
                assert (s, s) in n.role_hierarchy
            if calc is not Calculus.ENVELOPE:
                assert {(r, r) for r in n.negative_roles} <= n.role_hierarchy


def _renormalized(n) -> TBox:
    """The normalized axioms plus alias definitions, as an ordinary TBox."""
    axs = list(n.norm_axioms)
    for name, image in n.alias_concepts.items():
        axs.append(Equivalence(Named(name), image))
    return TBox.of(axs)


def test_normalization_is_a_conservative_extension():
    rng = random.Random(2024)
    for i in range(100):
        t = random_tbox(rng, chains=i % 3 == 0)
        expected = oracle_classify(t)
        names = t.concept_names
        for calc in CALCULI:
            try:
                n = normalize(t, calc)
            except UnsupportedFeatureError:
                continue
            renorm = _renormalized(n)
            again = classify(renorm, calc)
            assert {(a, b) for a, b in again if a in names and b in names} == expected


def test_denormalize_examples():
    assert denormalize_axiom(
        ConceptInclusion(Named("A"), Named("X")), {"X": Existential("t", Named("D"))}, {}
    ) == ax("SubClassOf(A ObjectSomeValuesFrom(t D))")
    assert denormalize_axiom(
        ConceptInclusion(Named("C"), Existential("_R1", Named("D"))), {}, {"_R1": ("r", "s")}
    ) == ax("SubClassOf(C ObjectSomeValuesFrom(r ObjectSomeValuesFrom(s D)))")
    assert denormalize_axiom(RoleChainInclusion(("r", "s"), "_R1"), {}, {"_R1": ("r", "s")}) is TAUTOLOGY
    assert denormalize_axiom(RoleChainInclusion(("_R1", "t"), "u"), {}, {"_R1": ("r", "s")}) == RoleChainInclusion(
        ("r", "s", "t"), "u"
    )


def test_denormalize_unknown_name(example_tbox):
    n = normalize(example_tbox, "elk")
    with pytest.raises(UnknownNameError):
        n.denormalize(ax("SubClassOf(A Zed)"))


@settings(max_examples=150, deadline=None)
@given(axioms)
def test_denormalize_is_identity_without_aliases(a):
    assert denormalize_axiom(a, {}, {}) == a


def test_tautology_recognition():
    for text in (
        "SubClassOf(A A)",
        "SubClassOf(A owl:Thing)",
        "SubObjectPropertyOf(r r)",
        "SubClassOf(owl:Nothing A)",
        "SubClassOf(ObjectIntersectionOf(A B) A)",
        "SubClassOf(ObjectSomeValuesFrom(r ObjectIntersectionOf(A B)) ObjectSomeValuesFrom(r B))",
    ):
        assert is_tautology(ax(text)), text
    for text in ("SubClassOf(A B)", "SubObjectPropertyOf(r s)", "SubClassOf(ObjectSomeValuesFrom(r A) ObjectSomeValuesFrom(s A))"):
        assert not is_tautology(ax(text)), text
