"""From derivation graphs to non-redundant DL proofs."""

from __future__ import annotations

import heapq
import json
from dataclasses import dataclass, field
from itertools import count, product
from typing import Optional

from .ontology import (
    TAUTOLOGY,
    Calculus,
    NormalizedTBox,
    asserted_axioms,
    desugar_sources,
    hierarchy_derivations,
    is_tautology,
)
from .parser import parse_axiom
from .saturation import DerivationGraph, Equiv, HierarchyPair, Init, Link, Sub
from .syntax import (
    BOTTOM,
    Axiom,
    ConceptInclusion,
    Equivalence,
    Existential,
    RoleChainInclusion,
    RoleInclusion,
    TBox,
    canonical_axiom,
    conjoin,
    conjuncts,
    desugar,
)

ASSERTED = "asserted"
TAUTOLOGY_RULE = "tautology"


class ProofError(RuntimeError):
    pass


class MissingRolePairError(ProofError):
    pass


class GoalNotDerivableError(ProofError):
    pass


@dataclass(frozen=True)
class DLStep:
    rule: str
    premises: tuple
    seq: int = field(default=0, compare=False)


class DLGraph:
    """Axiom-labeled hypergraph with every recorded way to obtain each axiom."""

    def __init__(self, calculus: Calculus, tbox: TBox):
        self.calculus = calculus
        self.tbox = tbox
        self.steps: dict = {}
        self.leaves: dict = {}  # axiom -> (kind, seq)

    def nodes(self) -> set:
        return set(self.steps) | set(self.leaves)

    def __contains__(self, ax) -> bool:
        return ax in self.steps or ax in self.leaves

    def add_step(self, concl: Axiom, rule: str, premises, seq: int):
        premises = tuple(dict.fromkeys(premises))
        if concl in premises:
            return
        steps = self.steps.setdefault(concl, [])
        if any(s.premises == premises and s.rule == rule for s in steps):
            return
        steps.append(DLStep(rule, premises, seq))

    def add_leaf(self, ax: Axiom, kind: str, seq: int):
        self.leaves.setdefault(ax, (kind, seq))


class _Lifter:
    def __init__(self, graph: DerivationGraph, ntbox: NormalizedTBox):
        self.graph = graph
        self.nt = ntbox
        self.dl = DLGraph(ntbox.calculus, ntbox.source)
        self.asserted = asserted_axioms(ntbox.source)
        self.sugar = desugar_sources(ntbox.source)
        self.cache: dict = {}

    def lift(self, fact):
        if fact in self.cache:
            return self.cache[fact]
        nt = self.nt
        if isinstance(fact, Sub):
            out = ConceptInclusion(nt.denormalize_concept(fact.lhs), nt.denormalize_concept(fact.rhs))
        elif isinstance(fact, Link):
            out = ConceptInclusion(
                nt.denormalize_concept(fact.src), nt.denormalize_concept(Existential(fact.role, fact.dst))
            )
        elif isinstance(fact, Equiv):
            out = Equivalence(nt.denormalize_concept(fact.a), nt.denormalize_concept(fact.b))
        else:
            out = None
        self.cache[fact] = out
        return out

    def admit(self, ax: Axiom, seq: int):
        """Register a normalized TBox axiom as something a proof may start from."""
        if ax in self.asserted:
            self.dl.add_leaf(ax, ASSERTED, seq)
        elif is_tautology(ax):
            self.dl.add_leaf(ax, TAUTOLOGY_RULE, seq)
        elif ax in self.sugar:
            for src in self.sugar[ax]:
                self.dl.add_leaf(src, ASSERTED, seq)
                self.dl.add_step(ax, "desugar", (src,), seq)
        else:
            raise ProofError(f"normalized axiom {ax} is neither asserted nor a tautology")

    def hierarchy(self):
        nt = self.nt
        told = [ax for ax in nt.norm_axioms if isinstance(ax, RoleInclusion)]
        entries = hierarchy_derivations(told, nt.role_hierarchy)
        seq = -len(entries) - 1
        for (r, t), via in entries:
            seq += 1
            label = nt.denormalize(RoleInclusion(r, t))
            if label is TAUTOLOGY:
                continue
            if via is None:
                self.dl.add_leaf(label, TAUTOLOGY_RULE, seq)
                continue
            first = nt.denormalize(RoleInclusion(r, via))
            self.admit(first, seq)
            self.dl.add_step(label, "role-trans", (first, nt.denormalize(RoleInclusion(via, t))), seq)
        for ax in told:
            label = nt.denormalize(ax)
            if label is not TAUTOLOGY and (label in self.dl.steps or label in self.dl.leaves):
                self.admit(label, -1)

    def side(self, s, seq: int):
        nt = self.nt
        if isinstance(s, HierarchyPair):
            label = nt.denormalize(RoleInclusion(s.sub, s.sup))
            if label is TAUTOLOGY:
                return None
            if label not in self.dl:
                raise MissingRolePairError(f"no derivation for role pair {s.sub} ⊑* {s.sup}")
            return label
        label = nt.denormalize(s)
        if label is TAUTOLOGY:
            return None
        self.admit(label, seq)
        return label

    def run(self) -> DLGraph:
        self.hierarchy()
        for fact, derivations in self.graph.derivations.items():
            concl = self.lift(fact)
            if concl is None:
                continue
            for d in derivations:
                premises = [self.lift(p) for p in d.premises if not isinstance(p, Init)]
                for s in d.side:
                    label = self.side(s, d.seq)
                    if label is not None:
                        premises.append(label)
                if premises:
                    self.dl.add_step(concl, d.rule, premises, d.seq)
                elif d.rule == "tbox":
                    self.admit(concl, d.seq)
                elif is_tautology(concl):
                    self.dl.add_leaf(concl, TAUTOLOGY_RULE, d.seq)
                else:
                    raise ProofError(f"premise-free derivation of non-tautology {concl} by {d.rule}")
        return self.dl


def lift_to_dl(graph: DerivationGraph, ntbox: Optional[NormalizedTBox] = None) -> DLGraph:
    return _Lifter(graph, ntbox or graph.ntbox).run()


@dataclass(frozen=True)
class Vertex:
    id: int
    label: Axiom
    rule: str
    children: tuple = ()


@dataclass
class ProofDag:
    vertices: list
    root: int = 0
    calculus: Optional[str] = None

    def __len__(self) -> int:
        return len(self.vertices)

    def __getitem__(self, i: int) -> Vertex:
        return self.vertices[i]

    @property
    def goal(self) -> Axiom:
        return self.vertices[self.root].label

    def labels(self) -> list:
        return [v.label for v in self.vertices]

    def to_json(self, goal: Optional[Axiom] = None) -> dict:
        return {
            "calculus": self.calculus,
            "goal": str(goal if goal is not None else self.goal),
            "root": self.root,
            "vertices": [
                {"id": v.id, "axiom": str(v.label), "rule": v.rule, "children": list(v.children)}
                for v in self.vertices
            ],
        }

    def dumps(self, goal: Optional[Axiom] = None) -> str:
        return json.dumps(self.to_json(goal), indent=2, ensure_ascii=False) + "\n"

    @classmethod
    def from_json(cls, data: dict) -> "ProofDag":
        vertices = []
        for i, v in enumerate(sorted(data["vertices"], key=lambda v: v["id"])):
            if v["id"] != i:
                raise ValueError("vertex ids must be dense and 0-based")
            vertices.append(Vertex(i, parse_axiom(v["axiom"]), v["rule"], tuple(v["children"])))
        return cls(vertices, data["root"], data.get("calculus"))

    @classmethod
    def loads(cls, text: str) -> "ProofDag":
        return cls.from_json(json.loads(text))


def _build_dag(goal: Axiom, choice: dict, calculus) -> ProofDag:
    """Number vertices in pre-order from the goal, following the chosen steps."""
    ids: dict = {}
    order: list = []
    stack = [goal]
    while stack:
        ax = stack.pop()
        if ax in ids:
            continue
        ids[ax] = len(order)
        order.append(ax)
        _, premises = choice[ax]
        stack.extend(reversed(premises))
    vertices = []
    for ax in order:
        rule, premises = choice[ax]
        vertices.append(Vertex(ids[ax], ax, rule, tuple(ids[p] for p in premises)))
    return ProofDag(vertices, 0, str(calculus) if calculus is not None else None)


def _check_goal(dl: DLGraph, goal: Axiom) -> Axiom:
    goal = canonical_axiom(goal)
    if goal not in dl:
        if is_tautology(goal):
            dl.add_leaf(goal, TAUTOLOGY_RULE, 0)
        else:
            raise GoalNotDerivableError(f"{goal} is not derivable")
    return goal


def best_costs(dl: DLGraph) -> dict:
    """(tree size, depth) of the cheapest unraveled proof of every axiom.

    Knuth's generalization of Dijkstra's algorithm: a step costs one more
    than the sum of its premises' sizes, so it is always strictly more
    expensive than each premise and nodes can be settled in heap order.
    """
    waiting: dict = {}
    users: dict = {}
    for concl, steps in dl.steps.items():
        for i, st in enumerate(steps):
            waiting[(concl, i)] = len(st.premises)
            for p in st.premises:
                users.setdefault(p, []).append((concl, i))
    tick = count()
    heap = []
    tentative: dict = {}
    for ax in dl.leaves:
        tentative[ax] = (1, 0)
        heapq.heappush(heap, (1, 0, next(tick), ax))
    final: dict = {}
    while heap:
        size, depth, _, ax = heapq.heappop(heap)
        if ax in final:
            continue
        final[ax] = (size, depth)
        for concl, i in users.get(ax, ()):
            waiting[(concl, i)] -= 1
            if waiting[(concl, i)] or concl in final:
                continue
            prem = dl.steps[concl][i].premises
            cost = (1 + sum(final[p][0] for p in prem), 1 + max(final[p][1] for p in prem))
            if concl not in tentative or cost < tentative[concl]:
                tentative[concl] = cost
                heapq.heappush(heap, (cost[0], cost[1], next(tick), concl))
    return final


def extract_min_proof(dl: DLGraph, goal: Axiom) -> ProofDag:
    goal = _check_goal(dl, goal)
    cost = best_costs(dl)
    if goal not in cost:
        raise GoalNotDerivableError(f"{goal} is not derivable")
    choice: dict = {}
    stack = [goal]
    while stack:
        ax = stack.pop()
        if ax in choice:
            continue
        if ax in dl.leaves:
            choice[ax] = (dl.leaves[ax][0], ())
            continue
        best = None
        for st in dl.steps[ax]:
            if not all(p in cost for p in st.premises):
                continue
            c = (1 + sum(cost[p][0] for p in st.premises), 1 + max(cost[p][1] for p in st.premises))
            if c != cost[ax]:
                continue
            key = tuple(str(p) for p in st.premises)
            if best is None or key < best[0]:
                best = (key, st)
        choice[ax] = (best[1].rule, best[1].premises)
        stack.extend(best[1].premises)
    return _build_dag(goal, choice, dl.calculus)


def extract_first_proof(dl: DLGraph, goal: Axiom) -> ProofDag:
    """Follow only the earliest recorded derivation of every axiom."""
    goal = _check_goal(dl, goal)
    choice: dict = {}
    stack = [goal]
    while stack:
        ax = stack.pop()
        if ax in choice:
            continue
        if ax in dl.leaves:
            choice[ax] = (dl.leaves[ax][0], ())
            continue
        steps = dl.steps.get(ax)
        if not steps:
            raise GoalNotDerivableError(f"{ax} is not derivable")
        st = min(steps, key=lambda s: s.seq)
        choice[ax] = (st.rule, st.premises)
        stack.extend(st.premises)
    dag = _build_dag(goal, choice, dl.calculus)
    if _has_cycle(dag):
        raise ProofError("earliest derivations form a cycle")
    return dag


def _has_cycle(dag: ProofDag) -> bool:
    state = [0] * len(dag.vertices)
    for start in range(len(dag.vertices)):
        if state[start]:
            continue
        stack = [(start, iter(dag.vertices[start].children))]
        state[start] = 1
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                state[v] = 2
                stack.pop()
            elif not 0 <= nxt < len(state):
                continue
            elif state[nxt] == 1:
                return True
            elif state[nxt] == 0:
                state[nxt] = 1
                stack.append((nxt, iter(dag.vertices[nxt].children)))
    return False


# -- tree unraveling ---------------------------------------------------------

DEFAULT_TREE_CAP = 100_000


@dataclass(frozen=True)
class TreeNode:
    vertex: int
    path: tuple
    children: tuple


class ProofTree:
    """The tree unraveling of a proof DAG.

    Trees up to ``cap`` nodes are materialized (``nodes`` in pre-order,
    node 0 is the root); larger ones stay implicit and metrics fall back
    to memoized recurrences over the DAG.
    """

    def __init__(self, dag: ProofDag, cap: int = DEFAULT_TREE_CAP):
        self.dag = dag
        self.cap = cap
        self.size = tree_sizes(dag)[dag.root]
        self.nodes: Optional[list] = None
        if self.size <= cap:
            self.nodes = self._materialize()

    @property
    def implicit(self) -> bool:
        return self.nodes is None

    def _materialize(self) -> list:
        dag = self.dag
        nodes: list = []

        def visit(v: int, path: tuple) -> int:
            idx = len(nodes)
            nodes.append(None)
            kids = tuple(visit(c, path + (i,)) for i, c in enumerate(dag[v].children))
            nodes[idx] = TreeNode(v, path, kids)
            return idx

        visit(self.dag.root, ())
        return nodes

    def label(self, node: int) -> Axiom:
        return self.dag[self.nodes[node].vertex].label

    def edges(self) -> list:
        return [(i, c) for i, n in enumerate(self.nodes) for c in n.children]


def tree_sizes(dag: ProofDag) -> list:
    size = [0] * len(dag.vertices)
    for v in _postorder(dag):
        size[v] = 1 + sum(size[c] for c in dag[v].children)
    return size


def _postorder(dag: ProofDag) -> list:
    seen, out = set(), []
    stack = [(dag.root, False)]
    while stack:
        v, done = stack.pop()
        if done:
            out.append(v)
            continue
        if v in seen:
            continue
        seen.add(v)
        stack.append((v, True))
        for c in reversed(dag[v].children):
            if c not in seen:
                stack.append((c, False))
    return out


def unravel(dag: ProofDag, cap: int = DEFAULT_TREE_CAP) -> ProofTree:
    return ProofTree(dag, cap)


# -- validation ----------------------------------------------------------------


def _ex_peels(c) -> list:
    """All (role path, filler) splits of a nested existential restriction."""
    out, path = [], ()
    while isinstance(c, Existential):
        path = path + (c.role,)
        c = c.filler
        out.append((path, c))
    return out


def _is_ci(*axioms) -> bool:
    return all(isinstance(a, ConceptInclusion) for a in axioms)


def _chain_step(p, concl, roles) -> bool:
    """C ⊑ ∃p1.D, D ⊑ ∃p2.E ⟹ C ⊑ ∃p.E, with role premises mapping p1, p2 to p."""
    if len(p) != 2 or not _is_ci(p[0], p[1], concl) or concl.lhs != p[0].lhs:
        return False
    incl = [a for a in roles if isinstance(a, RoleInclusion)]
    chains = [a for a in roles if isinstance(a, RoleChainInclusion)]
    if len(incl) + len(chains) != len(roles) or len(chains) > 1:
        return False
    options = [None] + incl
    for path1, d in _ex_peels(p[0].rhs):
        if d != p[1].lhs:
            continue
        for path2, e in _ex_peels(p[1].rhs):
            for path, e2 in _ex_peels(concl.rhs):
                if e2 != e:
                    continue
                for m1 in options:
                    for m2 in options:
                        if {m for m in (m1, m2) if m is not None} != set(incl):
                            continue
                        q1 = _map_path(path1, m1)
                        q2 = _map_path(path2, m2)
                        if q1 is None or q2 is None:
                            continue
                        if chains:
                            if chains[0].chain == q1 + q2 and path == (chains[0].sup,):
                                return True
                        elif path == q1 + q2:
                            return True
    return False


def _map_path(path, incl):
    if incl is None:
        return path
    if path == (incl.sub,):
        return (incl.sup,)
    return None


def _s_sub(p, c):  # C ⊑ D, D ⊑ E ⟹ C ⊑ E
    return len(p) == 2 and _is_ci(*p, c) and p[0].rhs == p[1].lhs and c == ConceptInclusion(p[0].lhs, p[1].rhs)


def _s_conj_intro_use(p, c):  # C ⊑ D1, C ⊑ D2, D1 ⊓ D2 ⊑ E ⟹ C ⊑ E
    return (
        len(p) == 3
        and _is_ci(*p, c)
        and p[0].lhs == p[1].lhs == c.lhs
        and conjoin(p[0].rhs, p[1].rhs) == p[2].lhs
        and p[2].rhs == c.rhs
    )


def _s_and_minus(p, c):
    if len(p) != 1 or not _is_ci(p[0], c) or p[0].lhs != c.lhs:
        return False
    whole, part = set(conjuncts(p[0].rhs)), set(conjuncts(c.rhs))
    return part < whole


def _s_and_plus(p, c):
    return len(p) == 2 and _is_ci(*p, c) and p[0].lhs == p[1].lhs == c.lhs and conjoin(p[0].rhs, p[1].rhs) == c.rhs


def _s_ex_plus(p, c):  # C ⊑ ∃r.D, D ⊑ E, r ⊑ s ⟹ C ⊑ ∃s.E
    if len(p) != 3 or not _is_ci(p[0], p[1], c) or not isinstance(p[2], RoleInclusion):
        return False
    r, s = p[2].sub, p[2].sup
    return p[0].rhs == Existential(r, p[1].lhs) and c == ConceptInclusion(p[0].lhs, Existential(s, p[1].rhs))


def _bottom_step(p, c):  # C ⊑ ∃r.E, E ⊑ ⊥ ⟹ C ⊑ ⊥
    if len(p) != 2 or not _is_ci(*p, c):
        return False
    return (
        p[1].rhs == BOTTOM
        and c == ConceptInclusion(p[0].lhs, BOTTOM)
        and any(f == p[1].lhs for _, f in _ex_peels(p[0].rhs))
    )


def _s_cr5p(p, c):  # C ⊑ ∃r.D1, D1 ⊑ D2, ∃s.D2 ⊑ E, r ⊑ s ⟹ C ⊑ E
    if len(p) != 4 or not _is_ci(p[0], p[1], p[2], c) or not isinstance(p[3], RoleInclusion):
        return False
    r, s = p[3].sub, p[3].sup
    return (
        p[0].rhs == Existential(r, p[1].lhs)
        and p[2].lhs == Existential(s, p[1].rhs)
        and c == ConceptInclusion(p[0].lhs, p[2].rhs)
    )


def _s_env_cr4(p, c):  # C ⊑ ∃r.D1, D1 ⊑ D2, ∃r.D2 ⊑ E ⟹ C ⊑ E
    if len(p) != 3 or not _is_ci(*p, c) or not isinstance(p[0].rhs, Existential):
        return False
    r = p[0].rhs.role
    return (
        p[0].rhs == Existential(r, p[1].lhs)
        and p[2].lhs == Existential(r, p[1].rhs)
        and c == ConceptInclusion(p[0].lhs, p[2].rhs)
    )


def _s_cr10(p, c):  # C ⊑ ∃r.E, r ⊑ s ⟹ C ⊑ ∃s.E
    if len(p) != 2 or not _is_ci(p[0], c) or not isinstance(p[1], RoleInclusion):
        return False
    rhs = p[0].rhs
    return (
        isinstance(rhs, Existential)
        and rhs.role == p[1].sub
        and c == ConceptInclusion(p[0].lhs, Existential(p[1].sup, rhs.filler))
    )


def _s_role_trans(p, c):  # r ⊑ s, s ⊑ t ⟹ r ⊑ t
    return (
        len(p) == 2
        and all(isinstance(a, RoleInclusion) for a in (*p, c))
        and p[0].sup == p[1].sub
        and c == RoleInclusion(p[0].sub, p[1].sup)
    )


def _s_desugar(p, c):
    return len(p) == 1 and c in {canonical_axiom(d) for d in desugar(p[0])}


def _s_equiv(p, c):
    return (
        len(p) == 2
        and isinstance(c, Equivalence)
        and p[0] == ConceptInclusion(c.a, c.b)
        and p[1] == ConceptInclusion(c.b, c.a)
    )


def _s_comp(p, c):
    return _chain_step(list(p[:2]), c, list(p[2:]))


_COMMON = {"desugar": _s_desugar, "equiv": _s_equiv}

STEP_SCHEMAS = {
    Calculus.ELK: {
        "R_sub": _s_sub,
        "R_and-": _s_and_minus,
        "R_and+": _s_and_plus,
        "R_ex+": _s_ex_plus,
        "R_bot": _bottom_step,
        "R_comp": _s_comp,
        "role-trans": _s_role_trans,
        **_COMMON,
    },
    Calculus.TEXTBOOK: {
        "CR3": _s_sub,
        "CR4": _s_conj_intro_use,
        "CR5p": _s_cr5p,
        "R_botp": _bottom_step,
        "role-trans": _s_role_trans,
        **_COMMON,
    },
    Calculus.ENVELOPE: {
        "CR1": _s_sub,
        "CR2": _s_conj_intro_use,
        "CR3": _s_sub,
        "CR4": _s_env_cr4,
        "CR5": _bottom_step,
        "CR10": _s_cr10,
        "CR11": _s_comp,
        **_COMMON,
    },
}


def step_matches(check, premises, conclusion) -> bool:
    """Match a schema, letting one deduplicated premise fill several positions."""
    premises = list(premises)
    if check(premises, conclusion):
        return True
    distinct = set(premises)
    for arity in range(len(premises) + 1, 6):
        for combo in product(premises, repeat=arity):
            if set(combo) == distinct and check(list(combo), conclusion):
                return True
    return False


@dataclass(frozen=True)
class Violation:
    kind: str
    vertex: Optional[int]
    message: str

    def __str__(self) -> str:
        where = "" if self.vertex is None else f" (vertex {self.vertex})"
        return f"{self.kind}{where}: {self.message}"


def validate_proof(dag: ProofDag, tbox: TBox, goal: Axiom, calculus=None) -> list:
    """Return every violation of the proof invariants (empty list if valid)."""
    out = []
    calc = Calculus(calculus if calculus is not None else dag.calculus)
    schemas = STEP_SCHEMAS[calc]
    n = len(dag.vertices)
    if not 0 <= dag.root < n:
        return [Violation("bad root", None, f"root id {dag.root} out of range")]
    goal = canonical_axiom(goal)
    if dag[dag.root].label != goal:
        out.append(Violation("wrong root", dag.root, f"root is {dag[dag.root].label}, goal is {goal}"))
    for i, v in enumerate(dag.vertices):
        if v.id != i:
            out.append(Violation("bad id", i, f"vertex at position {i} has id {v.id}"))
        for c in v.children:
            if not 0 <= c < n:
                out.append(Violation("dangling child", i, f"child id {c} out of range"))
    if out and any(v.kind == "dangling child" for v in out):
        return out
    if _has_cycle(dag):
        out.append(Violation("cycle", None, "the proof graph is cyclic"))
    seen: dict = {}
    for v in dag.vertices:
        if v.label in seen:
            out.append(Violation("duplicate label", v.id, f"{v.label} also labels vertex {seen[v.label]}"))
        else:
            seen[v.label] = v.id
    reachable = set(_postorder(dag)) if not _has_cycle(dag) else set(range(n))
    asserted = asserted_axioms(tbox)
    for v in dag.vertices:
        if v.id not in reachable:
            out.append(Violation("unreachable", v.id, f"{v.label} is not used by the root"))
        if not v.children:
            if v.rule == ASSERTED:
                if v.label not in asserted:
                    out.append(Violation("foreign leaf", v.id, f"{v.label} is not in the TBox"))
            elif v.rule == TAUTOLOGY_RULE:
                if not is_tautology(v.label):
                    out.append(Violation("false tautology", v.id, f"{v.label} is not a tautology"))
            else:
                out.append(Violation("unjustified leaf", v.id, f"{v.label} has rule {v.rule} but no premises"))
            continue
        if v.rule in (ASSERTED, TAUTOLOGY_RULE):
            out.append(Violation("leaf with premises", v.id, f"{v.rule} vertex {v.label} has children"))
            continue
        check = schemas.get(v.rule)
        if check is None:
            out.append(Violation("unknown rule", v.id, f"{v.rule} is not a {calc} rule"))
            continue
        premises = [dag[c].label for c in v.children]
        if not step_matches(check, premises, v.label):
            shown = "; ".join(map(str, premises))
            out.append(Violation("unsound step", v.id, f"{v.rule}: [{shown}] does not yield {v.label}"))
    return out
