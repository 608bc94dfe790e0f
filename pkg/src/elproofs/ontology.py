"""Normalization of EL+⊥ TBoxes for the three calculi.

Complex subconcepts are replaced by fresh concept names (``_C0001``, ...)
and long role chains by fresh role names (``_R1``, ...).  The alias maps
let every normalized statement be translated back into an axiom over the
input signature.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable

from .syntax import (
    BOTTOM,
    TOP,
    Axiom,
    Bottom,
    Concept,
    ConceptInclusion,
    Conjunction,
    Equivalence,
    Existential,
    Named,
    RoleChainInclusion,
    RoleInclusion,
    TBox,
    Top,
    canonical,
    canonical_axiom,
    conjuncts,
    desugar,
    is_atomic,
    subconcepts,
)


class Calculus(str, Enum):
    ELK = "elk"
    TEXTBOOK = "textbook"
    ENVELOPE = "envelope"

    def __str__(self) -> str:
        return self.value


CALCULI = (Calculus.ELK, Calculus.TEXTBOOK, Calculus.ENVELOPE)


class UnsupportedFeatureError(ValueError):
    """The TBox uses a construct the selected calculus cannot handle."""


class UnknownNameError(KeyError):
    pass


class _TautologyMarker:
    """Stands for a normalized axiom that has no place in a DL proof."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "TAUTOLOGY"


TAUTOLOGY = _TautologyMarker()


def _lhs_concepts(tbox: Iterable[Axiom]) -> list:
    out = []
    for ax in tbox:
        for d in desugar(ax):
            if isinstance(d, ConceptInclusion):
                out.append(d.lhs)
    return out


def negative_occurrences(tbox: Iterable[Axiom]) -> tuple:
    """Concepts occurring on some left-hand side, and the roles inside them."""
    concepts, roles = set(), set()
    for lhs in _lhs_concepts(tbox):
        for sub in subconcepts(lhs):
            concepts.add(sub)
            if isinstance(sub, Existential):
                roles.add(sub.role)
    return concepts, roles


def role_hierarchy_closure(tbox: Iterable[Axiom], seeds: Iterable[str]) -> set:
    """Pairs (r, t) with r ⊑* t, computed top-down from the seed roles."""
    direct = {}
    for ax in tbox:
        if isinstance(ax, RoleInclusion):
            direct.setdefault(ax.sup, []).append(ax.sub)
    closure = set()
    stack = [(t, t) for t in sorted(set(seeds))]
    while stack:
        pair = stack.pop()
        if pair in closure:
            continue
        closure.add(pair)
        s, t = pair
        for r in direct.get(s, ()):
            stack.append((r, t))
    return closure


def hierarchy_derivations(tbox: Iterable[Axiom], closure: set) -> list:
    """Every way each closure pair is obtained, in dependency order.

    Returns ``(pair, via)`` entries where ``via`` is None for reflexive
    seeds and the intermediate role ``s`` for ``r ⊑ s ∈ T, (s, t)``.
    """
    told = [ax for ax in tbox if isinstance(ax, RoleInclusion)]
    by_sup = {}
    for ax in told:
        by_sup.setdefault(ax.sup, []).append(ax.sub)
    out, done = [], set()
    frontier = sorted((p for p in closure if p[0] == p[1]))
    for p in frontier:
        out.append((p, None))
        done.add(p)
    while frontier:
        nxt = []
        for s, t in frontier:
            for r in by_sup.get(s, ()):
                pair = (r, t)
                if pair not in closure or pair[0] == pair[1]:
                    continue
                out.append((pair, s))
                if pair not in done:
                    done.add(pair)
                    nxt.append(pair)
        frontier = sorted(nxt)
    return out


@dataclass(frozen=True)
class NormalizedTBox:
    calculus: Calculus
    source: TBox
    norm_axioms: tuple
    alias_concepts: dict
    alias_roles: dict
    negative_concepts: frozenset
    negative_roles: frozenset
    role_hierarchy: frozenset
    main_names: tuple = ()

    @property
    def atoms(self) -> tuple:
        """Every name usable as a fact constituent: main names, aliases, ⊤, ⊥."""
        return tuple(Named(n) for n in self.main_names) + tuple(
            Named(a) for a in self.alias_concepts
        ) + (TOP, BOTTOM)

    def denormalize(self, ax):
        """Like denormalize_axiom, with the result in canonical form."""
        out = denormalize_axiom(ax, self.alias_concepts, self.alias_roles, self.source)
        return out if out is TAUTOLOGY else canonical_axiom(out)

    def denormalize_concept(self, c: Concept) -> Concept:
        return canonical(_expand(c, self.alias_concepts, self.alias_roles, self.source))


def _expand(c: Concept, aliases: dict, roles: dict, source) -> Concept:
    if isinstance(c, Named):
        if c.name in aliases:
            return aliases[c.name]
        if source is not None and c.name not in source.concept_names:
            raise UnknownNameError(c.name)
        return c
    if isinstance(c, Conjunction):
        return Conjunction(tuple(_expand(op, aliases, roles, source) for op in c.operands))
    if isinstance(c, Existential):
        filler = _expand(c.filler, aliases, roles, source)
        path = _role_path(c.role, roles, source)
        for r in reversed(path):
            filler = Existential(r, filler)
        return filler
    return c


def _role_path(r: str, roles: dict, source) -> tuple:
    if r in roles:
        return tuple(roles[r])
    if source is not None and r not in source.role_names:
        raise UnknownNameError(r)
    return (r,)


def denormalize_axiom(ax: Axiom, alias_concepts: dict, alias_roles: dict, source: TBox = None):
    """Replace fresh names by what they stand for.

    Returns TAUTOLOGY when the result would need a role composition on the
    right-hand side, i.e. the axiom merely defines a fresh role.
    """
    if isinstance(ax, ConceptInclusion):
        return ConceptInclusion(
            _expand(ax.lhs, alias_concepts, alias_roles, source),
            _expand(ax.rhs, alias_concepts, alias_roles, source),
        )
    if isinstance(ax, RoleInclusion):
        sub = _role_path(ax.sub, alias_roles, source)
        sup = _role_path(ax.sup, alias_roles, source)
        if len(sup) > 1:
            return TAUTOLOGY
        if len(sub) > 1:
            return RoleChainInclusion(sub, sup[0])
        return RoleInclusion(sub[0], sup[0])
    if isinstance(ax, RoleChainInclusion):
        sup = _role_path(ax.sup, alias_roles, source)
        if len(sup) > 1:
            return TAUTOLOGY
        chain = tuple(r for s in ax.chain for r in _role_path(s, alias_roles, source))
        return RoleChainInclusion(chain, sup[0])
    if isinstance(ax, Equivalence):
        return Equivalence(
            _expand(ax.a, alias_concepts, alias_roles, source),
            _expand(ax.b, alias_concepts, alias_roles, source),
        )
    return ax


class _Namer:
    def __init__(self, taken: set):
        self.taken = taken
        self.concepts = 0
        self.roles = 0

    def concept(self) -> str:
        while True:
            self.concepts += 1
            name = f"_C{self.concepts:04d}"
            if name not in self.taken:
                return name

    def role(self) -> str:
        while True:
            self.roles += 1
            name = f"_R{self.roles}"
            if name not in self.taken:
                return name


class _Normalizer:
    def __init__(self, tbox: TBox, calculus: Calculus):
        self.tbox = tbox
        self.calculus = calculus
        self.namer = _Namer(set(tbox.concept_names) | set(tbox.role_names))
        self.out: dict = {}
        self.alias_of: dict = {}  # canonical concept -> alias name
        self.alias_concepts: dict = {}
        self.alias_roles: dict = {}
        self.defined_neg: set = set()
        self.defined_pos: set = set()

    def emit(self, ax: Axiom):
        self.out.setdefault(ax, None)

    def alias(self, c: Concept) -> Named:
        name = self.alias_of.get(c)
        if name is None:
            name = self.namer.concept()
            self.alias_of[c] = name
            self.alias_concepts[name] = c
        return Named(name)

    # aliases are defined by extra normal-form axioms, in the direction the polarity needs

    def atom_neg(self, c: Concept) -> Concept:
        if is_atomic(c):
            return c
        x = self.alias(c)
        if x.name not in self.defined_neg:
            self.defined_neg.add(x.name)
            self.emit(ConceptInclusion(self.flat_neg(c), x))
        return x

    def flat_neg(self, c: Concept) -> Concept:
        if is_atomic(c):
            return c
        if isinstance(c, Existential):
            return Existential(c.role, self.atom_neg(c.filler))
        ops = c.operands
        head = ops[0] if len(ops) == 2 else Conjunction(ops[:-1])
        return Conjunction((self.atom_neg(head), self.atom_neg(ops[-1])))

    def atom_pos(self, c: Concept) -> Concept:
        if is_atomic(c):
            return c
        x = self.alias(c)
        if x.name not in self.defined_pos:
            self.defined_pos.add(x.name)
            parts = c.operands if isinstance(c, Conjunction) else (c,)
            for part in parts:
                self.emit(ConceptInclusion(x, self.flat_pos(part)))
        return x

    def flat_pos(self, c: Concept) -> Concept:
        if isinstance(c, Existential):
            return Existential(c.role, self.atom_pos(c.filler))
        return c

    def inclusion(self, ci: ConceptInclusion):
        lhs, rhs = ci.lhs, ci.rhs
        left = self.flat_neg(lhs)
        if is_atomic(rhs):
            right = rhs
        elif is_atomic(left) and isinstance(rhs, Existential):
            right = self.flat_pos(rhs)
        else:
            right = self.atom_pos(rhs)
        self.emit(ConceptInclusion(left, right))

    def chain(self, ax: RoleChainInclusion):
        chain = list(ax.chain)
        while len(chain) > 2:
            fresh = self.namer.role()
            prefix = (chain[0], chain[1])
            expanded = tuple(r for p in prefix for r in self.alias_roles.get(p, (p,)))
            self.alias_roles[fresh] = expanded
            self.emit(RoleChainInclusion(prefix, fresh))
            chain = [fresh] + chain[2:]
        self.emit(RoleChainInclusion(tuple(chain), ax.sup))

    def run(self) -> NormalizedTBox:
        flat = []
        for ax in self.tbox:
            flat.extend(canonical_axiom(d) for d in desugar(ax))
        flat = sorted(dict.fromkeys(flat), key=str)
        for ax in flat:
            if isinstance(ax, ConceptInclusion):
                self.inclusion(ax)
            elif isinstance(ax, RoleChainInclusion):
                if self.calculus is Calculus.TEXTBOOK:
                    raise UnsupportedFeatureError(
                        f"the textbook calculus only supports simple role inclusions: {ax}"
                    )
                self.chain(ax)
            else:
                self.emit(ax)
        for name in sorted(self.tbox.concept_names):
            self.emit(ConceptInclusion(BOTTOM, Named(name)))

        neg_concepts, neg_roles = negative_occurrences(flat)
        seeds = set(neg_roles)
        if self.calculus is Calculus.ELK:
            # R∘ consults the hierarchy below every role used in a chain axiom
            for ax in self.out:
                if isinstance(ax, RoleChainInclusion):
                    seeds |= set(ax.chain)
        norm = tuple(self.out)
        hierarchy = set()
        if self.calculus is not Calculus.ENVELOPE:
            hierarchy = role_hierarchy_closure(norm, seeds)
        return NormalizedTBox(
            calculus=self.calculus,
            source=self.tbox,
            norm_axioms=norm,
            alias_concepts=dict(self.alias_concepts),
            alias_roles=dict(self.alias_roles),
            negative_concepts=frozenset(neg_concepts),
            negative_roles=frozenset(neg_roles),
            role_hierarchy=frozenset(hierarchy),
            main_names=tuple(sorted(self.tbox.concept_names)),
        )


def normalize(tbox: TBox, calculus) -> NormalizedTBox:
    return _Normalizer(tbox, Calculus(calculus)).run()


def asserted_axioms(tbox: TBox) -> set:
    """Canonical forms of the axioms a proof may use as leaves."""
    return {canonical_axiom(ax) for ax in tbox}


def desugar_sources(tbox: TBox) -> dict:
    """Canonical desugared axiom -> input axioms it comes from."""
    out = {}
    for ax in tbox:
        for d in desugar(ax):
            d = canonical_axiom(d)
            if d != canonical_axiom(ax):
                out.setdefault(d, []).append(canonical_axiom(ax))
    return out


def is_tautology(ax) -> bool:
    """Axioms valid in every interpretation, recognized syntactically."""
    if isinstance(ax, RoleInclusion):
        return ax.sub == ax.sup
    if not isinstance(ax, ConceptInclusion):
        return False
    return _concept_subsumed(canonical(ax.lhs), canonical(ax.rhs))


def _concept_subsumed(c: Concept, d: Concept) -> bool:
    if c == d or isinstance(d, Top) or isinstance(c, Bottom):
        return True
    lhs_parts = conjuncts(c)
    for part in conjuncts(d):
        if part in lhs_parts:
            continue
        if isinstance(part, Existential) and any(
            isinstance(q, Existential) and q.role == part.role and _concept_subsumed(q.filler, part.filler)
            for q in lhs_parts
        ):
            continue
        return False
    return True
