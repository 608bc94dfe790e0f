"""Shape measures of proofs, computed on their tree unravelings."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields
from decimal import ROUND_HALF_EVEN, Decimal, localcontext
from fractions import Fraction
from typing import NamedTuple, Optional, Sequence, Union

from .proofs import ASSERTED, DEFAULT_TREE_CAP, ProofDag, ProofTree, Vertex, _postorder, tree_sizes
from .syntax import (
    BOTTOM,
    TOP,
    Bottom,
    ConceptInclusion,
    Conjunction,
    Equivalence,
    Existential,
    Named,
    RoleChainInclusion,
    RoleInclusion,
    Top,
    axiom_concepts,
    nesting_depth,
    subconcepts,
)

BRUTEFORCE_LIMIT = 12


class TreeTooLargeError(ValueError):
    pass


def tree_dag(children: Sequence[Sequence[int]], root: int = 0) -> ProofDag:
    """A ProofDag for a bare tree shape; vertex i gets the label X_i ⊑ X_i."""
    vertices = []
    for i, kids in enumerate(children):
        label = ConceptInclusion(Named(f"X{i}"), Named(f"X{i}"))
        vertices.append(Vertex(i, label, "step" if kids else ASSERTED, tuple(kids)))
    return ProofDag(vertices, root)


def _dag(proof: Union[ProofDag, ProofTree]) -> ProofDag:
    return proof.dag if isinstance(proof, ProofTree) else proof


def depths(dag: ProofDag) -> list:
    depth = [0] * len(dag.vertices)
    for v in _postorder(dag):
        kids = dag[v].children
        depth[v] = 1 + max(depth[c] for c in kids) if kids else 0
    return depth


def occurrences(dag: ProofDag) -> list:
    """How often each DAG vertex appears in the tree unraveling."""
    occ = [0] * len(dag.vertices)
    occ[dag.root] = 1
    for v in reversed(_postorder(dag)):
        for c in dag[v].children:
            occ[c] += occ[v]
    return occ


class BasicMetrics(NamedTuple):
    size: int
    depth: int
    justification_size: int
    bushiness: Fraction


def compute_basic(proof) -> BasicMetrics:
    dag = _dag(proof)
    size = tree_sizes(dag)[dag.root]
    depth = depths(dag)[dag.root]
    reachable = _postorder(dag)
    leaves = {dag[v].label for v in reachable if not dag[v].children and dag[v].rule == ASSERTED}
    return BasicMetrics(size, depth, len(leaves), Fraction(size, depth + 1))


# -- directed cutwidth -------------------------------------------------------


@dataclass(frozen=True)
class Serialization:
    """A topological order of tree nodes, each named by its child-index path from the root."""

    order: tuple

    @property
    def positions(self) -> dict:
        return {node: i for i, node in enumerate(self.order, start=1)}

    def cut_profile(self) -> list:
        return gap_cuts(self.order, [(p[:-1], p) for p in self.order if p])


def gap_cuts(order: Sequence, edges) -> list:
    """cut(i) for every gap i = 1 .. n-1: edges leaving the first i vertices."""
    pos = {v: i for i, v in enumerate(order, start=1)}
    diff = [0] * (len(order) + 2)
    for v, w in edges:
        a, b = pos[v], pos[w]
        if a > b:
            raise ValueError(f"order is not topological for edge {v} -> {w}")
        diff[a] += 1
        diff[b] -= 1
    cuts, running = [], 0
    for i in range(1, len(order)):
        running += diff[i]
        cuts.append(running)
    return cuts


class Cutwidth(NamedTuple):
    value: int
    witness: Optional[Serialization]


def _dcw_table(dag: ProofDag) -> tuple:
    """Per DAG vertex: dcw of its unraveled subtree and the standard child order."""
    size = tree_sizes(dag)
    dcw = [0] * len(dag.vertices)
    order = [()] * len(dag.vertices)
    for v in _postorder(dag):
        kids = dag[v].children
        if not kids:
            continue
        ranked = sorted(range(len(kids)), key=lambda i: (dcw[kids[i]], size[kids[i]], str(dag[kids[i]].label)))
        n = len(kids)
        dcw[v] = max([n] + [dcw[kids[i]] + n - k for k, i in enumerate(ranked, start=1)])
        order[v] = tuple(ranked)
    return dcw, order


def cutwidth_standard(proof, cap: int = DEFAULT_TREE_CAP) -> Cutwidth:
    """Directed cutwidth of the unraveled tree via the standard serialization.

    Children are laid out in non-decreasing order of their own cutwidth
    (ties: smaller subtree, then label), which is optimal on trees.  The
    witness is omitted when the tree has more than ``cap`` nodes.
    """
    dag = _dag(proof)
    dcw, order = _dcw_table(dag)
    witness = None
    if tree_sizes(dag)[dag.root] <= cap:
        out = []
        stack = [(dag.root, ())]
        while stack:
            v, path = stack.pop()
            out.append(path)
            kids = dag[v].children
            for i in reversed(order[v]):
                stack.append((kids[i], path + (i,)))
        witness = Serialization(tuple(out))
    return Cutwidth(dcw[dag.root], witness)


def tree_edges(proof) -> tuple:
    """Nodes (as paths) and root-to-leaf edges of the materialized unraveling."""
    dag = _dag(proof)
    if tree_sizes(dag)[dag.root] > BRUTEFORCE_LIMIT:
        raise TreeTooLargeError(f"brute force is limited to {BRUTEFORCE_LIMIT} vertices")
    nodes, edges = [], []
    stack = [(dag.root, ())]
    while stack:
        v, path = stack.pop()
        nodes.append(path)
        for i, c in enumerate(dag[v].children):
            edges.append((path, path + (i,)))
            stack.append((c, path + (i,)))
    return nodes, edges


def cutwidth_bruteforce(proof) -> int:
    """Minimum over every serialization of the largest gap cut (≤ 12 vertices)."""
    nodes, edges = tree_edges(proof)
    return min_cutwidth(nodes, edges)


def min_cutwidth(nodes: Sequence, edges) -> int:
    """Exhaustive search over topological orders of a small DAG, with pruning."""
    if len(nodes) > BRUTEFORCE_LIMIT:
        raise TreeTooLargeError(f"brute force is limited to {BRUTEFORCE_LIMIT} vertices")
    succ = {v: [] for v in nodes}
    indeg = {v: 0 for v in nodes}
    for v, w in edges:
        succ[v].append(w)
        indeg[w] += 1
    incoming = dict(indeg)
    n = len(nodes)
    best = len(edges) if n > 1 else 0
    ready = [v for v in nodes if indeg[v] == 0]

    def search(placed: int, cut: int, worst: int):
        nonlocal best
        if worst >= best and placed < n:
            return
        if placed == n:
            best = min(best, worst)
            return
        for v in list(ready):
            ready.remove(v)
            for w in succ[v]:
                indeg[w] -= 1
                if indeg[w] == 0:
                    ready.append(w)
            # placing v closes the edges into it and opens the edges out of it
            now = cut - incoming[v] + len(succ[v])
            search(placed + 1, now, worst if placed + 1 == n else max(worst, now))
            for w in succ[v]:
                if indeg[w] == 0:
                    ready.remove(w)
                indeg[w] += 1
            ready.append(v)

    search(0, 0, 0)
    return best


# -- step complexity ---------------------------------------------------------


@dataclass(frozen=True)
class StepWeights:
    premises: Fraction = Fraction(10)
    axiom_shapes: Fraction = Fraction(10)
    constructors: Fraction = Fraction(5)
    depth: Fraction = Fraction(2)
    triviality: Fraction = Fraction(50)

    _JSON_KEYS = {
        "wPremises": "premises",
        "wAxiomShapes": "axiom_shapes",
        "wConstructors": "constructors",
        "wDepth": "depth",
        "wTriviality": "triviality",
    }

    def __post_init__(self):
        for f in fields(self):
            value = Fraction(getattr(self, f.name))
            if value < 0:
                raise ValueError(f"weight {f.name} must be non-negative")
            object.__setattr__(self, f.name, value)

    def scaled(self, factor) -> "StepWeights":
        return StepWeights(*(getattr(self, f.name) * Fraction(factor) for f in fields(self)))

    @classmethod
    def from_json(cls, data: dict) -> "StepWeights":
        kwargs = {}
        for key, value in data.items():
            name = cls._JSON_KEYS.get(key, key)
            if name not in {f.name for f in fields(cls)}:
                raise ValueError(f"unknown weight {key!r}")
            kwargs[name] = Fraction(str(value))
        return cls(**kwargs)


def _shape(ax) -> str:
    if isinstance(ax, ConceptInclusion):
        return "concept inclusion"
    if isinstance(ax, RoleInclusion):
        return "role inclusion"
    if isinstance(ax, RoleChainInclusion):
        return "role chain inclusion"
    if isinstance(ax, Equivalence):
        return "equivalence"
    return type(ax).__name__


def _constructors(ax) -> set:
    out = set()
    for c in axiom_concepts(ax):
        for sub in subconcepts(c):
            if isinstance(sub, Conjunction):
                out.add("and")
            elif isinstance(sub, Existential):
                out.add("some")
            elif isinstance(sub, Top):
                out.add("top")
            elif isinstance(sub, Bottom):
                out.add("bottom")
    return out


def _is_trivial(ax) -> bool:
    if isinstance(ax, ConceptInclusion):
        sides = [(ax.lhs, ax.rhs)]
    elif isinstance(ax, Equivalence):
        sides = [(ax.a, ax.b), (ax.b, ax.a)]
    else:
        return False
    for lhs, rhs in sides:
        if any(isinstance(s, Bottom) for s in subconcepts(lhs)) or rhs == BOTTOM or lhs == TOP:
            return True
    return False


def step_complexity(conclusion, premises: Sequence, weights: StepWeights = StepWeights()) -> Fraction:
    if not premises:
        raise ValueError("step complexity is defined for inference steps only")
    axioms = [conclusion, *premises]
    shapes = {_shape(a) for a in axioms}
    constructors = set().union(*(_constructors(a) for a in axioms))
    depth = max((nesting_depth(c) for a in axioms for c in axiom_concepts(a)), default=0)
    trivial = any(_is_trivial(a) for a in axioms)
    return (
        weights.premises * len(premises)
        + weights.axiom_shapes * len(shapes)
        + weights.constructors * len(constructors)
        + weights.depth * depth
        + weights.triviality * int(trivial)
    )


def avg_step_complexity(proof, weights: StepWeights = StepWeights()) -> Fraction:
    """Mean step complexity over internal nodes of the unraveled tree (0 without steps)."""
    dag = _dag(proof)
    occ = occurrences(dag)
    total, steps = Fraction(0), 0
    for v in _postorder(dag):
        vert = dag[v]
        if not vert.children:
            continue
        sc = step_complexity(vert.label, [dag[c].label for c in vert.children], weights)
        total += sc * occ[v]
        steps += occ[v]
    return total / steps if steps else Fraction(0)


def step_count(proof) -> int:
    dag = _dag(proof)
    occ = occurrences(dag)
    return sum(occ[v] for v in _postorder(dag) if dag[v].children)


# -- report ------------------------------------------------------------------


def decimal4(x: Fraction) -> str:
    with localcontext() as ctx:
        ctx.prec = 50
        value = Decimal(x.numerator) / Decimal(x.denominator)
        return str(value.quantize(Decimal("0.0001"), rounding=ROUND_HALF_EVEN))


@dataclass(frozen=True)
class MetricsReport:
    size: int
    depth: int
    justification_size: int
    bushiness: Fraction
    cutwidth: int
    avg_step_complexity: Fraction
    step_count: int

    def to_json(self) -> dict:
        return {
            "size": self.size,
            "depth": self.depth,
            "justificationSize": self.justification_size,
            "bushiness": decimal4(self.bushiness),
            "bushinessNumerator": self.bushiness.numerator,
            "bushinessDenominator": self.bushiness.denominator,
            "cutwidth": self.cutwidth,
            "avgStepComplexity": decimal4(self.avg_step_complexity),
            "avgStepComplexityNumerator": self.avg_step_complexity.numerator,
            "avgStepComplexityDenominator": self.avg_step_complexity.denominator,
            "stepCount": self.step_count,
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2) + "\n"


def measure(proof, weights: StepWeights = StepWeights()) -> MetricsReport:
    basic = compute_basic(proof)
    return MetricsReport(
        size=basic.size,
        depth=basic.depth,
        justification_size=basic.justification_size,
        bushiness=basic.bushiness,
        cutwidth=cutwidth_standard(proof, cap=0).value,
        avg_step_complexity=avg_step_complexity(proof, weights),
        step_count=step_count(proof),
    )
