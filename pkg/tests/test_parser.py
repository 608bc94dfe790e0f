import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elproofs.parser import ArityError, ParseError, UnknownKeywordError, parse_axiom, parse_tbox
from elproofs.syntax import (
    BOTTOM,
    TOP,
    ConceptInclusion,
    Conjunction,
    Domain,
    Equivalence,
    Existential,
    Named,
    RoleChainInclusion,
    RoleInclusion,
    TBox,
    Transitivity,
)

from conftest import EXAMPLE_ELT


def test_existential_on_the_right():
    assert parse_axiom("SubClassOf(A ObjectSomeValuesFrom(r B))") == ConceptInclusion(
        Named("A"), Existential("r", Named("B"))
    )


def test_example_tbox_and_signature():
    tbox = parse_tbox(EXAMPLE_ELT)
    assert len(tbox) == 6
    assert tbox.concept_names == {"A", "B", "C", "D", "E"}
    assert tbox.role_names == {"r", "s", "t"}


def test_every_axiom_keyword():
    text = """
    # comment line
    SubClassOf(owl:Thing ObjectIntersectionOf(A B C))   # trailing comment
    EquivalentClasses(A ObjectSomeValuesFrom(r owl:Nothing))
    SubObjectPropertyOf(r s)
    SubObjectPropertyOf(ObjectPropertyChain(r s t) u)
    TransitiveObjectProperty(r)
    ObjectPropertyDomain(r X.y-1:z)
    """
    assert parse_tbox(text).axioms == (
        ConceptInclusion(TOP, Conjunction((Named("A"), Named("B"), Named("C")))),
        Equivalence(Named("A"), Existential("r", BOTTOM)),
        RoleInclusion("r", "s"),
        RoleChainInclusion(("r", "s", "t"), "u"),
        Transitivity("r"),
        Domain("r", Named("X.y-1:z")),
    )


def test_arity_error_reports_line():
    with pytest.raises(ArityError) as err:
        parse_tbox("SubClassOf(A)")
    assert err.value.line == 1


def test_errors_carry_positions():
    with pytest.raises(ArityError) as err:
        parse_tbox("SubClassOf(A B)\n\nSubClassOf(A B C)")
    assert err.value.line == 3
    with pytest.raises(UnknownKeywordError) as err:
        parse_tbox("SubClassOf(A B)\nDisjointClasses(A B)")
    assert (err.value.line, err.value.column) == (2, 1)
    with pytest.raises(ParseError) as err:
        parse_axiom("SubClassOf(A B) junk")
    assert err.value.column == 17
    with pytest.raises(ParseError) as err:
        parse_axiom("SubClassOf(A, B)")
    assert err.value.column == 13


@pytest.mark.parametrize(
    "text",
    [
        "SubClassOf(A B",
        "SubClassOf",
        "A",
        "SubClassOf(A ObjectIntersectionOf(B))",
        "SubObjectPropertyOf(ObjectPropertyChain(r) s)",
        "SubObjectPropertyOf(r ObjectSomeValuesFrom(r A))",
        "SubClassOf(A ObjectUnionOf(B C))",
        "TransitiveObjectProperty(owl:Thing)",
        ")",
    ],
)
def test_malformed_lines_are_rejected(text):
    with pytest.raises(ParseError):
        parse_axiom(text)


names = st.sampled_from(["A", "B", "C", "Dx", "e_1"])
roles = st.sampled_from(["r", "s", "has.part"])
concepts = st.recursive(
    st.one_of(names.map(Named), st.just(TOP), st.just(BOTTOM)),
    lambda inner: st.one_of(
        st.tuples(roles, inner).map(lambda t: Existential(*t)),
        st.lists(inner, min_size=2, max_size=3).map(lambda ops: Conjunction(tuple(ops))),
    ),
    max_leaves=8,
)
axioms = st.one_of(
    st.tuples(concepts, concepts).map(lambda t: ConceptInclusion(*t)),
    st.tuples(concepts, concepts).map(lambda t: Equivalence(*t)),
    st.tuples(roles, roles).map(lambda t: RoleInclusion(*t)),
    st.tuples(st.lists(roles, min_size=2, max_size=4), roles).map(lambda t: RoleChainInclusion(tuple(t[0]), t[1])),
    roles.map(Transitivity),
    st.tuples(roles, concepts).map(lambda t: Domain(*t)),
)


@settings(max_examples=200, deadline=None)
@given(st.lists(axioms, max_size=8))
def test_serialize_parse_round_trip(axs):
    tbox = TBox.of(axs)
    again = parse_tbox(tbox.serialize())
    assert again == tbox
    assert parse_tbox(again.serialize()) == again
