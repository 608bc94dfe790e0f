"""Concepts, axioms and TBoxes of EL+⊥, plus their `.elt` text form."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return "owl:Thing"


@dataclass(frozen=True)
class Bottom:
    def __str__(self) -> str:
        return "owl:Nothing"


@dataclass(frozen=True)
class Named:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Conjunction:
    operands: tuple

    def __post_init__(self):
        if len(self.operands) < 2:
            raise ValueError("a conjunction needs at least two operands")

    def __str__(self) -> str:
        return "ObjectIntersectionOf(" + " ".join(map(str, self.operands)) + ")"


@dataclass(frozen=True)
class Existential:
    role: str
    filler: "Concept"

    def __str__(self) -> str:
        return f"ObjectSomeValuesFrom({self.role} {self.filler})"


Concept = Union[Top, Bottom, Named, Conjunction, Existential]

TOP = Top()
BOTTOM = Bottom()


@dataclass(frozen=True)
class ConceptInclusion:
    lhs: Concept
    rhs: Concept

    def __str__(self) -> str:
        return f"SubClassOf({self.lhs} {self.rhs})"


@dataclass(frozen=True)
class RoleInclusion:
    sub: str
    sup: str

    def __str__(self) -> str:
        return f"SubObjectPropertyOf({self.sub} {self.sup})"


@dataclass(frozen=True)
class RoleChainInclusion:
    chain: tuple
    sup: str

    def __post_init__(self):
        if len(self.chain) < 2:
            raise ValueError("role chains have length >= 2; use RoleInclusion")

    def __str__(self) -> str:
        return f"SubObjectPropertyOf(ObjectPropertyChain({' '.join(self.chain)}) {self.sup})"


@dataclass(frozen=True)
class Equivalence:
    a: Concept
    b: Concept

    def __str__(self) -> str:
        return f"EquivalentClasses({self.a} {self.b})"


@dataclass(frozen=True)
class Transitivity:
    role: str

    def __str__(self) -> str:
        return f"TransitiveObjectProperty({self.role})"


@dataclass(frozen=True)
class Domain:
    role: str
    concept: Concept

    def __str__(self) -> str:
        return f"ObjectPropertyDomain({self.role} {self.concept})"


Axiom = Union[ConceptInclusion, RoleInclusion, RoleChainInclusion, Equivalence, Transitivity, Domain]


def is_atomic(c: Concept) -> bool:
    return isinstance(c, (Named, Top, Bottom))


def subconcepts(c: Concept) -> Iterator[Concept]:
    """Pre-order traversal of `c` and all its subconcepts."""
    yield c
    if isinstance(c, Conjunction):
        for op in c.operands:
            yield from subconcepts(op)
    elif isinstance(c, Existential):
        yield from subconcepts(c.filler)


def concept_names(c: Concept) -> set:
    return {s.name for s in subconcepts(c) if isinstance(s, Named)}


def concept_roles(c: Concept) -> set:
    return {s.role for s in subconcepts(c) if isinstance(s, Existential)}


def conjuncts(c: Concept) -> tuple:
    """Flattened operands of a conjunction; a 1-tuple for anything else."""
    if isinstance(c, Conjunction):
        out = []
        for op in c.operands:
            out.extend(conjuncts(op))
        return tuple(out)
    return (c,)


def canonical(c: Concept) -> Concept:
    """Flatten nested conjunctions, drop duplicate operands and sort them by text."""
    if isinstance(c, Existential):
        return Existential(c.role, canonical(c.filler))
    if isinstance(c, Conjunction):
        ops = {}
        for op in conjuncts(c):
            op = canonical(op)
            ops[str(op)] = op
        if len(ops) == 1:
            return next(iter(ops.values()))
        return Conjunction(tuple(ops[k] for k in sorted(ops)))
    return c


def conjoin(a: Concept, b: Concept) -> Concept:
    return canonical(Conjunction((a, b)))


def nesting_depth(c: Concept) -> int:
    if isinstance(c, Existential):
        return 1 + nesting_depth(c.filler)
    if isinstance(c, Conjunction):
        return 1 + max(nesting_depth(op) for op in c.operands)
    return 0


def canonical_axiom(ax: Axiom) -> Axiom:
    if isinstance(ax, ConceptInclusion):
        return ConceptInclusion(canonical(ax.lhs), canonical(ax.rhs))
    if isinstance(ax, Equivalence):
        return Equivalence(canonical(ax.a), canonical(ax.b))
    if isinstance(ax, Domain):
        return Domain(ax.role, canonical(ax.concept))
    return ax


def axiom_concepts(ax: Axiom) -> tuple:
    if isinstance(ax, ConceptInclusion):
        return (ax.lhs, ax.rhs)
    if isinstance(ax, Equivalence):
        return (ax.a, ax.b)
    if isinstance(ax, Domain):
        return (ax.concept,)
    return ()


def axiom_roles(ax: Axiom) -> set:
    roles = set()
    for c in axiom_concepts(ax):
        roles |= concept_roles(c)
    if isinstance(ax, RoleInclusion):
        roles |= {ax.sub, ax.sup}
    elif isinstance(ax, RoleChainInclusion):
        roles |= set(ax.chain) | {ax.sup}
    elif isinstance(ax, (Transitivity, Domain)):
        roles.add(ax.role)
    return roles


def desugar(ax: Axiom) -> tuple:
    """Rewrite an axiom into concept inclusions and role (chain) inclusions."""
    if isinstance(ax, Equivalence):
        return (ConceptInclusion(ax.a, ax.b), ConceptInclusion(ax.b, ax.a))
    if isinstance(ax, Transitivity):
        return (RoleChainInclusion((ax.role, ax.role), ax.role),)
    if isinstance(ax, Domain):
        return (ConceptInclusion(Existential(ax.role, TOP), ax.concept),)
    return (ax,)


@dataclass(frozen=True)
class TBox:
    """An ordered, duplicate-free collection of axioms."""

    axioms: tuple = ()
    concept_names: frozenset = field(init=False)
    role_names: frozenset = field(init=False)

    def __post_init__(self):
        axioms = tuple(dict.fromkeys(self.axioms))
        object.__setattr__(self, "axioms", axioms)
        names, roles = set(), set()
        for ax in axioms:
            for c in axiom_concepts(ax):
                names |= concept_names(c)
            roles |= axiom_roles(ax)
        object.__setattr__(self, "concept_names", frozenset(names))
        object.__setattr__(self, "role_names", frozenset(roles))

    @classmethod
    def of(cls, axioms: Iterable[Axiom]) -> "TBox":
        return cls(tuple(axioms))

    def __iter__(self):
        return iter(self.axioms)

    def __len__(self) -> int:
        return len(self.axioms)

    def __contains__(self, ax) -> bool:
        return ax in self.axioms

    def serialize(self) -> str:
        return "".join(f"{ax}\n" for ax in self.axioms)
