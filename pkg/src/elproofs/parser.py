"""Reader for the line-oriented `.elt` ontology format."""

from __future__ import annotations

import re
from pathlib import Path

from .syntax import (
    BOTTOM,
    TOP,
    Axiom,
    Concept,
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

_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_.:-]*)|(?P<punct>[()]))")

AXIOM_KEYWORDS = {
    "SubClassOf",
    "EquivalentClasses",
    "SubObjectPropertyOf",
    "TransitiveObjectProperty",
    "ObjectPropertyDomain",
}
CONCEPT_KEYWORDS = {"ObjectIntersectionOf", "ObjectSomeValuesFrom"}


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ArityError(ParseError):
    pass


class UnknownKeywordError(ParseError):
    pass


class _Term:
    """A parsed s-expression: a bare name, or a keyword applied to arguments."""

    __slots__ = ("head", "args", "col")

    def __init__(self, head, args, col):
        self.head = head
        self.args = args
        self.col = col


class _LineParser:
    def __init__(self, text: str, lineno: int):
        self.lineno = lineno
        self.tokens = []
        pos = 0
        while pos < len(text):
            if text[pos:].strip() == "":
                break
            m = _TOKEN.match(text, pos)
            if m is None:
                col = pos + 1 + (len(text[pos:]) - len(text[pos:].lstrip()))
                raise ParseError(f"unexpected character {text[col - 1]!r}", lineno, col)
            kind = "name" if m.group("name") else "punct"
            value = m.group(kind)
            self.tokens.append((kind, value, m.start(kind) + 1))
            pos = m.end()
        self.i = 0
        self.end_col = len(text) + 1

    def error(self, msg, col=None, cls=ParseError):
        return cls(msg, self.lineno, col if col is not None else self.end_col)

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def term(self) -> _Term:
        tok = self.peek()
        if tok is None:
            raise self.error("unexpected end of line")
        kind, value, col = tok
        if kind != "name":
            raise self.error(f"unexpected {value!r}", col)
        self.i += 1
        nxt = self.peek()
        if nxt is None or nxt[1] != "(":
            return _Term(value, None, col)
        self.i += 1
        args = []
        while True:
            tok = self.peek()
            if tok is None:
                raise self.error("missing ')'")
            if tok[1] == ")":
                self.i += 1
                return _Term(value, args, col)
            args.append(self.term())

    def axiom(self) -> Axiom:
        t = self.term()
        if self.peek() is not None:
            raise self.error("trailing input after axiom", self.peek()[2])
        return self.to_axiom(t)

    def arity(self, t: _Term, n: int, at_least=False):
        got = len(t.args)
        if (got < n) if at_least else (got != n):
            want = f"at least {n}" if at_least else str(n)
            raise self.error(f"{t.head} expects {want} arguments, got {got}", t.col, ArityError)

    def role(self, t: _Term) -> str:
        if t.args is not None:
            raise self.error(f"expected a role name, got {t.head}(...)", t.col)
        if t.head in ("owl:Thing", "owl:Nothing"):
            raise self.error(f"{t.head} is not a role", t.col)
        return t.head

    def to_axiom(self, t: _Term) -> Axiom:
        if t.args is None:
            raise self.error(f"expected an axiom, got bare name {t.head!r}", t.col)
        head = t.head
        if head == "SubClassOf":
            self.arity(t, 2)
            return ConceptInclusion(self.concept(t.args[0]), self.concept(t.args[1]))
        if head == "EquivalentClasses":
            self.arity(t, 2)
            return Equivalence(self.concept(t.args[0]), self.concept(t.args[1]))
        if head == "SubObjectPropertyOf":
            self.arity(t, 2)
            sub, sup = t.args
            if sub.args is not None and sub.head == "ObjectPropertyChain":
                self.arity(sub, 2, at_least=True)
                return RoleChainInclusion(tuple(self.role(r) for r in sub.args), self.role(sup))
            if sub.args is not None:
                raise self.error(f"unknown keyword {sub.head!r}", sub.col, UnknownKeywordError)
            return RoleInclusion(self.role(sub), self.role(sup))
        if head == "TransitiveObjectProperty":
            self.arity(t, 1)
            return Transitivity(self.role(t.args[0]))
        if head == "ObjectPropertyDomain":
            self.arity(t, 2)
            return Domain(self.role(t.args[0]), self.concept(t.args[1]))
        raise self.error(f"unknown keyword {head!r}", t.col, UnknownKeywordError)

    def concept(self, t: _Term) -> Concept:
        if t.args is None:
            if t.head == "owl:Thing":
                return TOP
            if t.head == "owl:Nothing":
                return BOTTOM
            return Named(t.head)
        if t.head == "ObjectIntersectionOf":
            self.arity(t, 2, at_least=True)
            return Conjunction(tuple(self.concept(a) for a in t.args))
        if t.head == "ObjectSomeValuesFrom":
            self.arity(t, 2)
            return Existential(self.role(t.args[0]), self.concept(t.args[1]))
        raise self.error(f"unknown keyword {t.head!r}", t.col, UnknownKeywordError)


def _strip_comment(line: str) -> str:
    i = line.find("#")
    return line if i < 0 else line[:i]


def parse_axiom(text: str, lineno: int = 1) -> Axiom:
    return _LineParser(_strip_comment(text), lineno).axiom()


def parse_tbox(text: str) -> TBox:
    axioms = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = _strip_comment(line)
        if body.strip():
            axioms.append(_LineParser(body, lineno).axiom())
    return TBox.of(axioms)


def load_tbox(path) -> TBox:
    return parse_tbox(Path(path).read_text(encoding="utf-8"))
