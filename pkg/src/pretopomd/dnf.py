"""Positive boolean rules combining prenetwork membership tests.

Grammar (keywords case-insensitive, AND binds tighter than OR)::

    expr   := term (OR term)*
    term   := factor (AND factor)*
    factor := IDENT | '(' expr ')'

Rules are trees of :class:`Var`, :class:`And` and :class:`Or`. There is no
negation node, so every rule is monotone in its inputs.
"""
from __future__ import annotations

import functools
import itertools
import operator
import re
from dataclasses import dataclass
from typing import Mapping, Union

from .exceptions import (
    EmptyInput,
    NegationUnsupported,
    RuleError,
    RuleSyntaxError,
    UnboundVariable,
)


@dataclass(frozen=True)
class Var:
    name: str

    def __post_init__(self):
        if not _IDENT.fullmatch(self.name) or self.name.upper() in _KEYWORDS:
            raise RuleError(f"invalid variable name {self.name!r}")


@dataclass(frozen=True)
class And:
    children: tuple["Rule", ...]

    def __init__(self, *children):
        _init_children(self, children)


@dataclass(frozen=True)
class Or:
    children: tuple["Rule", ...]

    def __init__(self, *children):
        _init_children(self, children)


Rule = Union[Var, And, Or]

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_KEYWORDS = {"AND", "OR", "NOT"}


def _init_children(node, children):
    if len(children) == 1 and isinstance(children[0], (list, tuple)):
        children = tuple(children[0])
    if len(children) < 2:
        raise RuleError(f"{type(node).__name__} needs at least two children")
    object.__setattr__(node, "children", tuple(children))


# -- parsing ---------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[()])|(?P<bad>\S))")


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace left
            break
        start = m.start(m.lastgroup)
        if m.lastgroup == "ident":
            word = m.group("ident")
            upper = word.upper()
            if upper == "NOT":
                raise NegationUnsupported(start)
            kind = upper if upper in ("AND", "OR") else "IDENT"
            tokens.append((kind, word, start))
        elif m.lastgroup == "punct":
            tokens.append((m.group("punct"), m.group("punct"), start))
        else:
            char = m.group("bad")
            if char in "!~-":
                raise NegationUnsupported(start)
            raise RuleSyntaxError(start, "identifier, AND, OR or parenthesis", char)
        pos = m.end()
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def fail(self, expected):
        tok = self.peek()
        if tok is None:
            raise RuleSyntaxError(len(self.text), expected)
        raise RuleSyntaxError(tok[2], expected, tok[1])

    def expr(self):
        terms = [self.term()]
        while self.peek() and self.peek()[0] == "OR":
            self.i += 1
            terms.append(self.term())
        return terms[0] if len(terms) == 1 else Or(*terms)

    def term(self):
        factors = [self.factor()]
        while self.peek() and self.peek()[0] == "AND":
            self.i += 1
            factors.append(self.factor())
        return factors[0] if len(factors) == 1 else And(*factors)

    def factor(self):
        tok = self.peek()
        if tok is not None and tok[0] == "IDENT":
            self.i += 1
            return Var(tok[1])
        if tok is not None and tok[0] == "(":
            self.i += 1
            node = self.expr()
            if self.peek() is None or self.peek()[0] != ")":
                self.fail("')'")
            self.i += 1
            return node
        self.fail("identifier or '('")


def parse_rule(text: str) -> Rule:
    if not text or not text.strip():
        raise EmptyInput("rule text is empty")
    parser = _Parser(text)
    node = parser.expr()
    if parser.peek() is not None:
        parser.fail("AND, OR or end of input")
    return node


# -- evaluation ------------------------------------------------------------

def evaluate(rule: Rule, assignment: Mapping):
    """Evaluate ``rule`` under ``assignment``.

    Values may be plain booleans or numpy boolean arrays (evaluated
    elementwise), which lets one call decide membership for many elements.
    """
    if isinstance(rule, Var):
        try:
            return assignment[rule.name]
        except KeyError:
            raise UnboundVariable(rule.name) from None
    values = [evaluate(child, assignment) for child in rule.children]
    op = operator.and_ if isinstance(rule, And) else operator.or_
    return functools.reduce(op, values)


def variables(rule: Rule) -> set[str]:
    if isinstance(rule, Var):
        return {rule.name}
    return set().union(*(variables(c) for c in rule.children))


def to_dnf(rule: Rule) -> list[frozenset[str]]:
    """Flatten to a minimal list of conjunctions (absorbed terms dropped)."""
    if isinstance(rule, Var):
        terms = [frozenset([rule.name])]
    elif isinstance(rule, Or):
        terms = [t for c in rule.children for t in to_dnf(c)]
    else:
        terms = [frozenset().union(*combo)
                 for combo in itertools.product(*(to_dnf(c) for c in rule.children))]
    unique = set(terms)
    minimal = [t for t in unique if not any(o < t for o in unique)]
    return sorted(minimal, key=lambda t: (len(t), sorted(t)))


# -- formatting ------------------------------------------------------------

def format_rule(rule: Rule) -> str:
    """Canonical text; ``parse_rule(format_rule(r)) == r`` for every rule."""
    if isinstance(rule, Var):
        return rule.name
    if isinstance(rule, And):
        # nested AND keeps its parentheses so the tree shape survives re-parsing
        parts = [format_rule(c) if isinstance(c, Var) else f"({format_rule(c)})"
                 for c in rule.children]
        return " AND ".join(parts)
    parts = [f"({format_rule(c)})" if isinstance(c, Or) else format_rule(c)
             for c in rule.children]
    return " OR ".join(parts)


def format_dnf(rule: Rule) -> str:
    return " OR ".join("(" + " AND ".join(sorted(t)) + ")" if len(t) > 1 else next(iter(t))
                       for t in to_dnf(rule))
