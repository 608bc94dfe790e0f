"""Round-based saturation of a normalized TBox, keeping every rule application."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

from .ontology import Calculus, NormalizedTBox, normalize
from .syntax import (
    BOTTOM,
    TOP,
    Axiom,
    Concept,
    ConceptInclusion,
    Conjunction,
    Equivalence,
    Existential,
    Named,
    RoleChainInclusion,
    RoleInclusion,
    TBox,
    is_atomic,
)

DEFAULT_FACT_CAP = 10_000_000


class ResourceLimitError(RuntimeError):
    pass


class UnsupportedGoalError(ValueError):
    pass


@dataclass(frozen=True)
class Sub:
    """lhs ⊑ rhs between normal-form concepts over names, aliases, ⊤ and ⊥."""

    lhs: Concept
    rhs: Concept

    @property
    def complex(self) -> bool:
        return not (is_atomic(self.lhs) and is_atomic(self.rhs))

    def __str__(self) -> str:
        return f"{self.lhs} ⊑ {self.rhs}"


@dataclass(frozen=True)
class Link:
    src: Concept
    role: str
    dst: Concept

    def __str__(self) -> str:
        return f"{self.src} -{self.role}-> {self.dst}"


@dataclass(frozen=True)
class Init:
    concept: Concept

    def __str__(self) -> str:
        return f"init({self.concept})"


@dataclass(frozen=True)
class Equiv:
    a: Concept
    b: Concept

    def __str__(self) -> str:
        return f"{self.a} ≡ {self.b}"


@dataclass(frozen=True)
class HierarchyPair:
    """Side condition r ⊑*_T s, looked up in the precomputed role hierarchy."""

    sub: str
    sup: str


@dataclass(frozen=True)
class Derivation:
    rule: str
    premises: tuple = ()
    side: tuple = ()
    seq: int = field(default=0, compare=False)

    @property
    def key(self) -> tuple:
        return (self.rule, self.premises, self.side)


class DerivationGraph:
    """Every fact of a saturation run and all the ways it was derived."""

    def __init__(self, ntbox: NormalizedTBox):
        self.ntbox = ntbox
        self.derivations: dict = {}
        self.rounds: dict = {}
        self._keys: dict = {}
        self._seq = 0

    def __contains__(self, fact) -> bool:
        return fact in self.derivations

    def __len__(self) -> int:
        return len(self.derivations)

    @property
    def seeds(self) -> list:
        return [f for f, ds in self.derivations.items() if any(not d.premises for d in ds)]

    def add(self, fact, rule: str, premises=(), side=(), round_no: int = 0) -> bool:
        """Record a derivation; returns True if the fact itself is new."""
        d = Derivation(rule, tuple(premises), tuple(side), self._seq)
        keys = self._keys.get(fact)
        is_new = keys is None
        if is_new:
            keys = self._keys[fact] = set()
            self.derivations[fact] = []
            self.rounds[fact] = round_no
        if d.key in keys:
            return False
        keys.add(d.key)
        self._seq += 1
        self.derivations[fact].append(d)
        return is_new


class _Engine:
    rules: tuple = ()

    def __init__(self, ntbox: NormalizedTBox, cap: int, deadline: Optional[float]):
        self.nt = ntbox
        self.graph = DerivationGraph(ntbox)
        self.cap = cap
        self.deadline = deadline
        self.round = 0
        self.pending: list = []
        self.hier_sup: dict = {}
        for r, s in sorted(ntbox.role_hierarchy):
            self.hier_sup.setdefault(r, []).append(s)
        self.hierarchy = set(ntbox.role_hierarchy)

    def derive(self, fact, rule, premises=(), side=()):
        if self.graph.add(fact, rule, premises, side, self.round + 1):
            if len(self.graph) > self.cap:
                raise ResourceLimitError(f"more than {self.cap} derived facts")
            self.pending.append(fact)

    def run(self) -> DerivationGraph:
        self.seed()
        activated = 0
        while self.pending:
            current, self.pending = self.pending, []
            for fact in current:
                activated += 1
                if self.deadline is not None and activated % 256 == 0 and time.monotonic() > self.deadline:
                    raise ResourceLimitError("time limit exceeded during saturation")
                self.activate(fact)
            self.round += 1
        return self.graph

    def seed(self):
        raise NotImplementedError

    def activate(self, fact):
        raise NotImplementedError


def _oset_add(index: dict, key, value):
    index.setdefault(key, {})[value] = None


def _list_add(index: dict, key, value):
    index.setdefault(key, []).append(value)


class _ElkEngine(_Engine):
    def __init__(self, ntbox, cap, deadline, init=None):
        super().__init__(ntbox, cap, deadline)
        self.init = init
        self.told: dict = {}
        self.chains: dict = {}
        for ax in ntbox.norm_axioms:
            if isinstance(ax, ConceptInclusion):
                _list_add(self.told, ax.lhs, (ax.rhs, ax))
            elif isinstance(ax, RoleChainInclusion):
                _list_add(self.chains, ax.chain, (ax.sup, ax))
        # complex left-hand sides are exactly the negatively occurring complex concepts
        self.conj_neg_by_op: dict = {}
        self.ex_neg: dict = {}
        self.top_negative = False
        for lhs in dict.fromkeys(ax.lhs for ax in ntbox.norm_axioms if isinstance(ax, ConceptInclusion)):
            if isinstance(lhs, Conjunction):
                a1, a2 = lhs.operands
                _list_add(self.conj_neg_by_op, a1, (lhs, a1, a2))
                if a2 != a1:
                    _list_add(self.conj_neg_by_op, a2, (lhs, a1, a2))
                self.top_negative |= TOP in (a1, a2)
            elif isinstance(lhs, Existential):
                self.ex_neg[(lhs.role, lhs.filler)] = lhs
                self.top_negative |= lhs.filler == TOP
            else:
                self.top_negative |= lhs == TOP
        self.sub_by_lhs: dict = {}
        self.sub_by_rhs: dict = {}
        self.links_out: dict = {}
        self.links_in: dict = {}

    def seed(self):
        names = self.init if self.init is not None else [Named(n) for n in self.nt.main_names]
        for c in names:
            self.graph.add(Init(c), "seed", round_no=0)
            self.pending.append(Init(c))

    def activate(self, f):
        if isinstance(f, Init):
            c = f.concept
            self.derive(Sub(c, c), "R_0", (f,))
            if self.top_negative:
                self.derive(Sub(c, TOP), "R_top", (f,))
        elif isinstance(f, Sub):
            self.activate_sub(f)
        else:
            self.activate_link(f)

    def activate_sub(self, f: Sub):
        c, d = f.lhs, f.rhs
        _oset_add(self.sub_by_lhs, c, d)
        _oset_add(self.sub_by_rhs, d, c)
        for e, ax in self.told.get(d, ()):
            self.derive(Sub(c, e), "R_sub", (f,), (ax,))
        if isinstance(d, Conjunction):
            a1, a2 = d.operands
            self.derive(Sub(c, a1), "R_and-", (f,))
            self.derive(Sub(c, a2), "R_and-", (f,))
        have = self.sub_by_lhs[c]
        for x, a1, a2 in self.conj_neg_by_op.get(d, ()):
            if a1 in have and a2 in have:
                self.derive(Sub(c, x), "R_and+", (Sub(c, a1), Sub(c, a2)))
        if isinstance(d, Existential):
            self.derive(Link(c, d.role, d.filler), "R_ex-", (f,))
        # f as the second premise D ⊑ E of R∃+
        for src, r in self.links_in.get(c, ()):
            for s in self.hier_sup.get(r, ()):
                x = self.ex_neg.get((s, d))
                if x is not None:
                    self.derive(Sub(src, x), "R_ex+", (Link(src, r, c), f), (HierarchyPair(r, s),))
        if d == BOTTOM:
            for src, r in self.links_in.get(c, ()):
                self.derive(Sub(src, BOTTOM), "R_bot", (Link(src, r, c), f))

    def activate_link(self, f: Link):
        c, r, d = f.src, f.role, f.dst
        _list_add(self.links_out, c, (r, d))
        _list_add(self.links_in, d, (c, r))
        sups = self.hier_sup.get(r, ())
        for e in self.sub_by_lhs.get(d, ()):
            for s in sups:
                x = self.ex_neg.get((s, e))
                if x is not None:
                    self.derive(Sub(c, x), "R_ex+", (f, Sub(d, e)), (HierarchyPair(r, s),))
        self.derive(Init(d), "R_leads", (f,))
        if BOTTOM in self.sub_by_lhs.get(d, ()):
            self.derive(Sub(c, BOTTOM), "R_bot", (f, Sub(d, BOTTOM)))
        if not self.chains:
            return
        for r2, e in list(self.links_out.get(d, ())):
            self._compose(Link(c, r, d), Link(d, r2, e))
        for c0, r1 in list(self.links_in.get(c, ())):
            self._compose(Link(c0, r1, c), f)

    def _compose(self, first: Link, second: Link):
        for s1 in self.hier_sup.get(first.role, ()):
            for s2 in self.hier_sup.get(second.role, ()):
                for s, ax in self.chains.get((s1, s2), ()):
                    self.derive(
                        Link(first.src, s, second.dst),
                        "R_comp",
                        (first, second),
                        (HierarchyPair(first.role, s1), HierarchyPair(second.role, s2), ax),
                    )


class _TextbookEngine(_Engine):
    def __init__(self, ntbox, cap, deadline):
        super().__init__(ntbox, cap, deadline)
        self.aa_by_lhs: dict = {}
        self.aa_by_rhs: dict = {}
        self.ae_by_lhs: dict = {}
        self.ae_by_filler: dict = {}
        self.conj_by_op: dict = {}
        self.ea_by_filler: dict = {}

    def seed(self):
        for ax in self.nt.norm_axioms:
            if isinstance(ax, ConceptInclusion):
                f = Sub(ax.lhs, ax.rhs)
                if self.graph.add(f, "tbox", round_no=0):
                    self.pending.append(f)
        for c in self.nt.atoms:
            for f, rule in ((Sub(c, c), "CR1"), (Sub(c, TOP), "CR2")):
                if self.graph.add(f, rule, round_no=0):
                    self.pending.append(f)

    def activate(self, f: Sub):
        lhs, rhs = f.lhs, f.rhs
        if is_atomic(lhs) and is_atomic(rhs):
            self._atomic(f, lhs, rhs)
        elif is_atomic(lhs):
            self._existential(f, lhs, rhs.role, rhs.filler)
        elif isinstance(lhs, Conjunction):
            self._conjunction(f, lhs.operands[0], lhs.operands[1], rhs)
        else:
            self._restriction(f, lhs.role, lhs.filler, rhs)

    def _atomic(self, f, c, d):
        _oset_add(self.aa_by_lhs, c, d)
        _oset_add(self.aa_by_rhs, d, c)
        # CR3, f first
        for e in list(self.aa_by_lhs.get(d, ())):
            self.derive(Sub(c, e), "CR3", (f, Sub(d, e)))
        for r, b in list(self.ae_by_lhs.get(d, ())):
            self.derive(Sub(c, Existential(r, b)), "CR3", (f, Sub(d, Existential(r, b))))
        # CR3, f second
        for c0 in list(self.aa_by_rhs.get(c, ())):
            self.derive(Sub(c0, d), "CR3", (Sub(c0, c), f))
        # CR4
        have = self.aa_by_lhs[c]
        for a1, a2, e in self.conj_by_op.get(d, ()):
            if a1 in have and a2 in have:
                self.derive(Sub(c, e), "CR4", (Sub(c, a1), Sub(c, a2), Sub(Conjunction((a1, a2)), e)))
        # CR5', f as D1 ⊑ D2
        for c0, r in self.ae_by_filler.get(c, ()):
            for s, e in self.ea_by_filler.get(d, ()):
                if (r, s) in self.hierarchy:
                    self.derive(
                        Sub(c0, e),
                        "CR5p",
                        (Sub(c0, Existential(r, c)), f, Sub(Existential(s, d), e)),
                        (HierarchyPair(r, s),),
                    )
        if d == BOTTOM:
            for c0, r in self.ae_by_filler.get(c, ()):
                self.derive(Sub(c0, BOTTOM), "R_botp", (Sub(c0, Existential(r, c)), f))

    def _existential(self, f, c, r, b):
        _list_add(self.ae_by_lhs, c, (r, b))
        _list_add(self.ae_by_filler, b, (c, r))
        for c0 in list(self.aa_by_rhs.get(c, ())):
            self.derive(Sub(c0, Existential(r, b)), "CR3", (Sub(c0, c), f))
        for d2 in self.aa_by_lhs.get(b, ()):
            for s, e in self.ea_by_filler.get(d2, ()):
                if (r, s) in self.hierarchy:
                    self.derive(
                        Sub(c, e),
                        "CR5p",
                        (f, Sub(b, d2), Sub(Existential(s, d2), e)),
                        (HierarchyPair(r, s),),
                    )
        if BOTTOM in self.aa_by_lhs.get(b, ()):
            self.derive(Sub(c, BOTTOM), "R_botp", (f, Sub(b, BOTTOM)))

    def _conjunction(self, f, a1, a2, e):
        _list_add(self.conj_by_op, a1, (a1, a2, e))
        if a2 != a1:
            _list_add(self.conj_by_op, a2, (a1, a2, e))
        with_a2 = self.aa_by_rhs.get(a2, {})
        for c in list(self.aa_by_rhs.get(a1, ())):
            if c in with_a2:
                self.derive(Sub(c, e), "CR4", (Sub(c, a1), Sub(c, a2), f))

    def _restriction(self, f, s, d2, e):
        _list_add(self.ea_by_filler, d2, (s, e))
        for d1 in list(self.aa_by_rhs.get(d2, ())):
            for c, r in list(self.ae_by_filler.get(d1, ())):
                if (r, s) in self.hierarchy:
                    self.derive(
                        Sub(c, e),
                        "CR5p",
                        (Sub(c, Existential(r, d1)), Sub(d1, d2), f),
                        (HierarchyPair(r, s),),
                    )


class _EnvelopeEngine(_Engine):
    def __init__(self, ntbox, cap, deadline):
        super().__init__(ntbox, cap, deadline)
        self.t_aa: dict = {}
        self.t_conj: dict = {}
        self.t_ae: dict = {}
        self.t_ea: dict = {}
        self.t_role: dict = {}
        self.t_chain: dict = {}
        self.t_chain_first: dict = {}
        for ax in ntbox.norm_axioms:
            if isinstance(ax, ConceptInclusion):
                lhs, rhs = ax.lhs, ax.rhs
                if is_atomic(lhs) and is_atomic(rhs):
                    _list_add(self.t_aa, lhs, (rhs, ax))
                elif is_atomic(lhs):
                    _list_add(self.t_ae, lhs, (rhs.role, rhs.filler, ax))
                elif isinstance(lhs, Conjunction):
                    a1, a2 = lhs.operands
                    _list_add(self.t_conj, a1, (a1, a2, rhs, ax))
                    if a2 != a1:
                        _list_add(self.t_conj, a2, (a1, a2, rhs, ax))
                else:
                    _list_add(self.t_ea, (lhs.role, lhs.filler), (rhs, ax))
            elif isinstance(ax, RoleInclusion):
                _list_add(self.t_role, ax.sub, (ax.sup, ax))
            elif isinstance(ax, RoleChainInclusion):
                _list_add(self.t_chain, ax.chain, (ax.sup, ax))
                _list_add(self.t_chain_first, ax.chain[0], ax.chain[1])
        self.aa_by_lhs: dict = {}
        self.ae_by_lhs: dict = {}
        self.ae_by_filler: dict = {}

    def seed(self):
        for c in self.nt.atoms:
            for f in (Sub(c, c), Sub(c, TOP)):
                if self.graph.add(f, "seed", round_no=0):
                    self.pending.append(f)

    def activate(self, f: Sub):
        if is_atomic(f.rhs):
            self._atomic(f, f.lhs, f.rhs)
        else:
            self._existential(f, f.lhs, f.rhs.role, f.rhs.filler)

    def _atomic(self, f, c, d):
        _oset_add(self.aa_by_lhs, c, d)
        for e, ax in self.t_aa.get(d, ()):
            self.derive(Sub(c, e), "CR1", (f,), (ax,))
        have = self.aa_by_lhs[c]
        for a1, a2, e, ax in self.t_conj.get(d, ()):
            if a1 in have and a2 in have:
                self.derive(Sub(c, e), "CR2", (Sub(c, a1), Sub(c, a2)), (ax,))
        for r, e, ax in self.t_ae.get(d, ()):
            self.derive(Sub(c, Existential(r, e)), "CR3", (f,), (ax,))
        for c0, r in self.ae_by_filler.get(c, ()):
            for e, ax in self.t_ea.get((r, d), ()):
                self.derive(Sub(c0, e), "CR4", (Sub(c0, Existential(r, c)), f), (ax,))
        if d == BOTTOM:
            for c0, r in self.ae_by_filler.get(c, ()):
                self.derive(Sub(c0, BOTTOM), "CR5", (Sub(c0, Existential(r, c)), f))

    def _existential(self, f, c, r, d):
        _list_add(self.ae_by_lhs.setdefault(c, {}), r, d)
        _list_add(self.ae_by_filler, d, (c, r))
        for d2 in self.aa_by_lhs.get(d, ()):
            for e, ax in self.t_ea.get((r, d2), ()):
                self.derive(Sub(c, e), "CR4", (f, Sub(d, d2)), (ax,))
        if BOTTOM in self.aa_by_lhs.get(d, ()):
            self.derive(Sub(c, BOTTOM), "CR5", (f, Sub(d, BOTTOM)))
        for s, ax in self.t_role.get(r, ()):
            self.derive(Sub(c, Existential(s, d)), "CR10", (f,), (ax,))
        # CR11 with f as the first premise
        for r2 in self.t_chain_first.get(r, ()):
            for e in list(self.ae_by_lhs.get(d, {}).get(r2, ())):
                for s, ax in self.t_chain[(r, r2)]:
                    self.derive(Sub(c, Existential(s, e)), "CR11", (f, Sub(d, Existential(r2, e))), (ax,))
        # ... and as the second one
        for c0, r1 in list(self.ae_by_filler.get(c, ())):
            for s, ax in self.t_chain.get((r1, r), ()):
                self.derive(Sub(c0, Existential(s, d)), "CR11", (Sub(c0, Existential(r1, c)), f), (ax,))


def saturate(
    ntbox: NormalizedTBox,
    *,
    init=None,
    cap: int = DEFAULT_FACT_CAP,
    deadline: Optional[float] = None,
) -> DerivationGraph:
    """Run the calculus selected by ``ntbox.calculus`` to its fixpoint.

    ``init`` restricts the elk seeds to the given concepts (goal-directed
    mode); by default every main concept name is initialized.
    """
    calc = ntbox.calculus
    if calc is Calculus.ELK:
        engine = _ElkEngine(ntbox, cap, deadline, init=init)
    elif calc is Calculus.TEXTBOOK:
        engine = _TextbookEngine(ntbox, cap, deadline)
    else:
        engine = _EnvelopeEngine(ntbox, cap, deadline)
    return engine.run()


def classify_graph(graph: DerivationGraph) -> set:
    names = [Named(n) for n in graph.ntbox.main_names]
    out = set()
    for a in names:
        unsat = Sub(a, BOTTOM) in graph
        for b in names:
            if a != b and (unsat or Sub(a, b) in graph):
                out.add((a.name, b.name))
    return out


def classify(tbox: TBox, calculus, **kwargs) -> set:
    """All entailed (A, B) subsumptions between distinct concept names."""
    return classify_graph(saturate(normalize(tbox, calculus), **kwargs))


class Entailment(NamedTuple):
    holds: bool
    fact: object
    graph: DerivationGraph


def _goal_concept(c: Concept, tbox: TBox) -> Concept:
    if isinstance(c, Named):
        if c.name not in tbox.concept_names:
            raise UnsupportedGoalError(f"goal mentions {c.name!r}, which is not in the TBox signature")
        return c
    if is_atomic(c):
        return c
    raise UnsupportedGoalError(f"goal concepts must be names, owl:Thing or owl:Nothing; got {c}")


def _is_trivial(a: Concept, b: Concept) -> bool:
    return a == b or b == TOP or a == BOTTOM


def entails(
    tbox: TBox,
    calculus,
    goal: Axiom,
    *,
    goal_directed: bool = False,
    cap: int = DEFAULT_FACT_CAP,
    deadline: Optional[float] = None,
    ntbox: Optional[NormalizedTBox] = None,
) -> Entailment:
    if isinstance(goal, ConceptInclusion):
        pairs = [(goal.lhs, goal.rhs)]
    elif isinstance(goal, Equivalence):
        pairs = [(goal.a, goal.b), (goal.b, goal.a)]
    else:
        raise UnsupportedGoalError(f"unsupported goal axiom: {goal}")
    pairs = [(_goal_concept(a, tbox), _goal_concept(b, tbox)) for a, b in pairs]

    nt = ntbox if ntbox is not None else normalize(tbox, calculus)
    init = None
    if nt.calculus is Calculus.ELK:
        lhs = sorted({a for a, _ in pairs}, key=str)
        if goal_directed:
            init = lhs
        elif any(not isinstance(a, Named) for a in lhs):
            init = [Named(n) for n in nt.main_names] + [a for a in lhs if not isinstance(a, Named)]
    graph = saturate(nt, init=init, cap=cap, deadline=deadline)

    facts = []
    for a, b in pairs:
        if Sub(a, b) in graph:
            facts.append(Sub(a, b))
        elif _is_trivial(a, b) or Sub(a, BOTTOM) in graph:
            facts.append(None)
        else:
            return Entailment(False, None, graph)
    if isinstance(goal, ConceptInclusion):
        return Entailment(True, facts[0], graph)
    fact = Equiv(*pairs[0])
    if all(f is not None for f in facts):
        graph.add(fact, "equiv", tuple(facts), round_no=max(graph.rounds[f] for f in facts) + 1)
        return Entailment(True, fact, graph)
    return Entailment(True, None, graph)
