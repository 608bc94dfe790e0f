import json
import random
from fractions import Fraction
from functools import cache

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from elproofs.bench import prove
from elproofs.metrics import (
    MetricsReport,
    StepWeights,
    TreeTooLargeError,
    avg_step_complexity,
    compute_basic,
    cutwidth_bruteforce,
    cutwidth_standard,
    decimal4,
    gap_cuts,
    measure,
    min_cutwidth,
    step_complexity,
    tree_dag,
    tree_edges,
)
from elproofs.parser import parse_axiom, parse_tbox
from elproofs.proofs import unravel

from conftest import EXAMPLE_ELT, EXAMPLE_SHAPE, full_binary, random_tree
from oracle import brute_cutwidth


def ax(text):
    return parse_axiom(text)


def _edges(children):
    return [(v, c) for v, kids in enumerate(children) for c in kids]


trees = st.integers(1, 12).flatmap(
    lambda n: st.lists(st.integers(0, n), min_size=n - 1, max_size=n - 1).map(
        lambda picks: _grow(picks)
    )
)


def _grow(picks):
    children = [[] for _ in range(len(picks) + 1)]
    for v, p in enumerate(picks, start=1):
        children[p % v].append(v)
    return children


@pytest.mark.parametrize("calc", ["elk", "textbook", "envelope"])
def test_basic_metrics_of_example(example_tbox, example_goal, calc):
    dag = prove(example_tbox, example_goal, calc)
    size, depth, cw = EXAMPLE_SHAPE[calc]
    basic = compute_basic(unravel(dag))
    assert (basic.size, basic.depth) == (size, depth)
    assert basic.bushiness == Fraction(size, depth + 1)
    assert cutwidth_standard(dag).value == cw == cutwidth_bruteforce(dag)
    if calc == "elk":
        assert basic.justification_size == 6


def test_bushiness_of_full_binary_tree_and_chains():
    basic = compute_basic(tree_dag(full_binary(4)))
    assert basic.size == 31 and basic.bushiness == Fraction(31, 5)
    assert decimal4(basic.bushiness) == "6.2000"
    chain = [[i + 1] for i in range(5)] + [[]]
    assert compute_basic(tree_dag(chain)).bushiness == 1
    single = compute_basic(tree_dag([[]]))
    assert (single.size, single.depth, single.bushiness) == (1, 0, 1)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_full_binary_cutwidth_is_depth_plus_one(d):
    assert cutwidth_standard(tree_dag(full_binary(d))).value == d + 1


def test_small_cases():
    assert cutwidth_standard(tree_dag([[]])).value == 0
    assert cutwidth_bruteforce(tree_dag([[]])) == 0
    for n in range(2, 8):
        path = [[i + 1] for i in range(n - 1)] + [[]]
        assert cutwidth_bruteforce(tree_dag(path)) == 1 == cutwidth_standard(tree_dag(path)).value
    for leaves in range(1, 8):
        star = [list(range(1, leaves + 1))] + [[] for _ in range(leaves)]
        assert cutwidth_bruteforce(tree_dag(star)) == leaves == cutwidth_standard(tree_dag(star)).value


def test_recurrence_matches_bruteforce_on_random_trees():
    rng = random.Random(20240601)
    for _ in range(250):
        children = random_tree(rng, rng.randint(1, 9))
        dag = tree_dag(children)
        assert cutwidth_standard(dag).value == cutwidth_bruteforce(dag), children


def test_branch_and_bound_matches_permutations():
    rng = random.Random(3)
    for _ in range(120):
        n = rng.randint(1, 7)
        children = random_tree(rng, n)
        assert min_cutwidth(list(range(n)), _edges(children)) == brute_cutwidth(n, _edges(children))


def test_bruteforce_rejects_large_trees():
    with pytest.raises(TreeTooLargeError):
        cutwidth_bruteforce(tree_dag(full_binary(3)))
    with pytest.raises(TreeTooLargeError):
        min_cutwidth(list(range(13)), [])


@settings(max_examples=200, deadline=None)
@given(trees)
def test_witness_is_consistent_and_respects_lower_bound(children):
    dag = tree_dag(children)
    cw = cutwidth_standard(dag)
    cuts = cw.witness.cut_profile()
    assert max(cuts, default=0) == cw.value
    assert cw.value >= max(len(k) for k in children)
    positions = cw.witness.positions
    assert all(positions[p[:-1]] < positions[p] for p in cw.witness.order if p)
    assert len(cw.witness.order) == len(children)


@settings(max_examples=100, deadline=None)
@given(trees.filter(lambda c: len(c) <= 9))
def test_dual_ordering_has_the_same_cutwidth(children):
    nodes, edges = tree_edges(tree_dag(children))
    reverse = [(w, v) for v, w in edges]
    assert min_cutwidth(nodes, reverse) == min_cutwidth(nodes, edges)
    witness = cutwidth_standard(tree_dag(children)).witness.order
    assert gap_cuts(tuple(reversed(witness)), reverse) == list(reversed(gap_cuts(witness, edges)))


def test_cutwidth_on_implicit_tree():
    dag = tree_dag(full_binary(5))
    cw = cutwidth_standard(dag, cap=10)
    assert cw.value == 6 and cw.witness is None


def test_step_complexity_examples():
    assert step_complexity(
        ax("SubClassOf(A ObjectSomeValuesFrom(r C))"), [ax("SubClassOf(A B)"), ax("SubClassOf(B ObjectSomeValuesFrom(r C))")]
    ) == 37
    assert step_complexity(
        ax("SubClassOf(A owl:Nothing)"), [ax("SubClassOf(A ObjectSomeValuesFrom(r B))"), ax("SubClassOf(B owl:Nothing)")]
    ) == 92
    assert step_complexity(ax("SubClassOf(A B)"), [ax("SubClassOf(A B)")]) == 20
    with pytest.raises(ValueError):
        step_complexity(ax("SubClassOf(A B)"), [])


def test_step_complexity_counts_shapes_and_depth():
    sc = step_complexity(
        ax("SubClassOf(A ObjectSomeValuesFrom(t D))"),
        [ax("SubClassOf(A ObjectSomeValuesFrom(r C))"), ax("SubClassOf(C D)"), ax("SubObjectPropertyOf(r t)")],
    )
    assert sc == 3 * 10 + 2 * 10 + 1 * 5 + 1 * 2


@settings(max_examples=50, deadline=None)
@given(st.fractions(min_value=Fraction(1, 100), max_value=100))
def test_scaling_weights_scales_complexity(factor):
    dag = prove_example()
    base = avg_step_complexity(dag)
    assert avg_step_complexity(dag, StepWeights().scaled(factor)) == base * factor


@cache
def prove_example():
    return prove(parse_tbox(EXAMPLE_ELT), ax("SubClassOf(A E)"), "elk")


def test_average_counts_tree_occurrences():
    # root with two children that share one internal vertex
    dag = tree_dag([[1, 1], [2], []])
    assert measure(dag).step_count == 3
    assert avg_step_complexity(tree_dag([[]])) == 0


def test_weights_validation_and_json():
    with pytest.raises(ValueError):
        StepWeights(premises=-1)
    w = StepWeights.from_json({"wPremises": 1, "wDepth": "1/2"})
    assert w.premises == 1 and w.depth == Fraction(1, 2) and w.triviality == 50
    with pytest.raises(ValueError):
        StepWeights.from_json({"wUnknown": 1})


def test_report_json(example_tbox, example_goal):
    report = measure(prove(example_tbox, example_goal, "elk"))
    assert isinstance(report, MetricsReport)
    data = json.loads(report.dumps())
    assert data["size"] == 10 and data["depth"] == 3 and data["justificationSize"] == 6
    assert data["bushiness"] == "2.5000"
    assert (data["bushinessNumerator"], data["bushinessDenominator"]) == (5, 2)
    assert data["cutwidth"] == 3
    assert data["stepCount"] == 4
    assert Fraction(data["avgStepComplexityNumerator"], data["avgStepComplexityDenominator"]) == report.avg_step_complexity


def test_decimal_rounding():
    assert decimal4(Fraction(1, 3)) == "0.3333"
    assert decimal4(Fraction(2, 3)) == "0.6667"
    assert decimal4(Fraction(1, 20000)) == "0.0000"
    assert decimal4(Fraction(3, 20000)) == "0.0002"
