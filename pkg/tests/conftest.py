from __future__ import annotations

import random
from pathlib import Path

import pytest

from elproofs.parser import parse_axiom, parse_tbox
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

EXAMPLE_ELT = """\
SubClassOf(A B)
SubClassOf(B ObjectSomeValuesFrom(r C))
SubClassOf(C D)
SubClassOf(ObjectSomeValuesFrom(t D) E)
SubObjectPropertyOf(r s)
SubObjectPropertyOf(s t)
"""

# The three example proofs of A ⊑ E, as (label, children) trees.
EXAMPLE_PROOFS = {
    "elk": (
        "SubClassOf(A E)",
        [
            (
                "SubClassOf(A ObjectSomeValuesFrom(t D))",
                [
                    ("SubClassOf(A ObjectSomeValuesFrom(r C))", [("SubClassOf(A B)", []), ("SubClassOf(B ObjectSomeValuesFrom(r C))", [])]),
                    ("SubClassOf(C D)", []),
                    ("SubObjectPropertyOf(r t)", [("SubObjectPropertyOf(r s)", []), ("SubObjectPropertyOf(s t)", [])]),
                ],
            ),
            ("SubClassOf(ObjectSomeValuesFrom(t D) E)", []),
        ],
    ),
    "textbook": (
        "SubClassOf(A E)",
        [
            ("SubClassOf(A ObjectSomeValuesFrom(r C))", [("SubClassOf(A B)", []), ("SubClassOf(B ObjectSomeValuesFrom(r C))", [])]),
            ("SubClassOf(C D)", []),
            ("SubClassOf(ObjectSomeValuesFrom(t D) E)", []),
            ("SubObjectPropertyOf(r t)", [("SubObjectPropertyOf(r s)", []), ("SubObjectPropertyOf(s t)", [])]),
        ],
    ),
    "envelope": (
        "SubClassOf(A E)",
        [
            (
                "SubClassOf(A ObjectSomeValuesFrom(t C))",
                [
                    (
                        "SubClassOf(A ObjectSomeValuesFrom(s C))",
                        [
                            ("SubClassOf(A ObjectSomeValuesFrom(r C))", [("SubClassOf(A B)", []), ("SubClassOf(B ObjectSomeValuesFrom(r C))", [])]),
                            ("SubObjectPropertyOf(r s)", []),
                        ],
                    ),
                    ("SubObjectPropertyOf(s t)", []),
                ],
            ),
            ("SubClassOf(C D)", []),
            ("SubClassOf(ObjectSomeValuesFrom(t D) E)", []),
        ],
    ),
}
EXAMPLE_SHAPE = {"elk": (10, 3, 3), "textbook": (9, 2, 4), "envelope": (10, 4, 3)}


def tree_shape(node) -> tuple:
    """Canonical form of a (label, children) tree, insensitive to child order."""
    label, kids = node
    return (str(parse_axiom(label)), tuple(sorted(tree_shape(k) for k in kids)))


def dag_shape(dag, v=None) -> tuple:
    v = dag.root if v is None else v
    return (str(dag[v].label), tuple(sorted(dag_shape(dag, c) for c in dag[v].children)))


@pytest.fixture
def example_tbox() -> TBox:
    return parse_tbox(EXAMPLE_ELT)


@pytest.fixture
def example_goal():
    return parse_axiom("SubClassOf(A E)")


# -- random inputs -----------------------------------------------------------

NAMES = [f"N{i}" for i in range(8)]
ROLES = ["r", "s", "t"]


def random_concept(rng: random.Random, depth: int = 2):
    roll = rng.random()
    if depth == 0 or roll < 0.45:
        pick = rng.random()
        if pick < 0.05:
            return TOP
        if pick < 0.08:
            return BOTTOM
        return Named(rng.choice(NAMES))
    if roll < 0.75:
        return Existential(rng.choice(ROLES), random_concept(rng, depth - 1))
    return Conjunction(tuple(random_concept(rng, depth - 1) for _ in range(rng.choice((2, 2, 3)))))


def random_tbox(rng: random.Random, max_axioms: int = 15, chains: bool = False) -> TBox:
    """A small random ELH⊥ TBox (EL+⊥ with ``chains``) over at most 8 names."""
    axioms = []
    for _ in range(rng.randint(1, max_axioms)):
        roll = rng.random()
        if roll < 0.68:
            lhs = random_concept(rng)
            rhs = random_concept(rng) if rng.random() < 0.6 else Named(rng.choice(NAMES))
            if rhs == BOTTOM and rng.random() < 0.7:
                rhs = Named(rng.choice(NAMES))
            axioms.append(ConceptInclusion(lhs, rhs))
        elif roll < 0.76:
            axioms.append(Equivalence(Named(rng.choice(NAMES)), random_concept(rng, 1)))
        elif roll < 0.88:
            a, b = rng.sample(ROLES, 2)
            axioms.append(RoleInclusion(a, b))
        elif roll < 0.94 or not chains:
            axioms.append(Domain(rng.choice(ROLES), Named(rng.choice(NAMES))))
        elif roll < 0.97:
            axioms.append(Transitivity(rng.choice(ROLES)))
        else:
            axioms.append(RoleChainInclusion(tuple(rng.choice(ROLES) for _ in range(rng.choice((2, 3)))), rng.choice(ROLES)))
    return TBox.of(axioms)


def random_tree(rng: random.Random, n: int) -> list:
    """Children lists of a uniformly grown random tree with root 0."""
    children = [[] for _ in range(n)]
    for v in range(1, n):
        children[rng.randrange(v)].append(v)
    return children


def full_binary(depth: int) -> list:
    children = []

    def grow(level):
        v = len(children)
        children.append([])
        if level < depth:
            children[v] = [grow(level + 1), grow(level + 1)]
        return v

    grow(0)
    return children


@pytest.fixture
def tmp_suite(tmp_path) -> Path:
    return tmp_path / "suite"


# -- acceptance summary ---------------------------------------------------------

_criteria: dict = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): an acceptance criterion")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    if report.when == "call" or report.outcome != "passed":
        number, title = marker
        prev = _criteria.get(number, (title, "PASS"))[1]
        _criteria[number] = (title, "FAIL" if report.outcome != "passed" or prev == "FAIL" else "PASS")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, verdict = _criteria[number]
        terminalreporter.write_line(f"criterion {number}: {verdict}  {title}")
