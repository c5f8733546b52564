"""Text syntax for polynomials.

::

    expr   := ['-'] term (('+'|'-') term)*
    term   := rational ('*' factor)* | factor ('*' factor)*
    factor := ident | 'inv(' ident ')' | 'D(' expr ')'
            | '[' expr ',' expr ']' | '{' expr ',' expr '}' | '(' expr ')'
    ident  := name ('_' 'x'{1..4} | '_x' integer)?

``[a, b]`` is the commutator ``ab - ba`` and ``{a, b}`` the anticommutator.
``str(NCPoly)`` prints in this syntax, so ``parse(str(p)) == p``.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .errors import ParseError
from .ncpoly import NCPoly, anticommutator, commutator, const, inv, jet, x_derive

__all__ = ["parse", "parse_expr"]

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<number>\d+(?:/\d+)?)
  | (?P<ident>[A-Za-z][A-Za-z0-9]*(?:_x\d+|_x{1,4}(?![A-Za-z0-9]))?)
  | (?P<punct>[-+*(),\[\]{}])
""", re.VERBOSE)

_IDENT = re.compile(r"([A-Za-z][A-Za-z0-9]*)(?:_(x{1,4})|_x(\d+))?$")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def peek(self, offset: int = 1):
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def take(self, value: str):
        kind, text, pos = self.tok
        if text != value or kind not in ("punct", "ident"):
            raise ParseError(f"expected {value!r}", pos, frozenset({value}))
        self.i += 1

    def expr(self) -> NCPoly:
        negate = False
        if self.tok[1] == "-" and self.tok[0] == "punct":
            negate = True
            self.i += 1
        acc = self.term()
        if negate:
            acc = -acc
        while self.tok[0] == "punct" and self.tok[1] in "+-":
            op = self.tok[1]
            self.i += 1
            t = self.term()
            acc = acc + t if op == "+" else acc - t
        return acc

    def term(self) -> NCPoly:
        kind, text, pos = self.tok
        if kind == "number":
            self.i += 1
            acc = const(Fraction(text))
        else:
            acc = self.factor()
        while self.tok[0] == "punct" and self.tok[1] == "*":
            self.i += 1
            acc = acc * self.factor()
        return acc

    def factor(self) -> NCPoly:
        kind, text, pos = self.tok
        if kind == "ident":
            if text in ("inv", "D") and self.peek()[1] == "(":
                self.i += 2
                if text == "D":
                    inner = self.expr()
                    self.take(")")
                    return x_derive(inner)
                kind2, name, pos2 = self.tok
                if kind2 != "ident":
                    raise ParseError("expected identifier", pos2, frozenset({"identifier"}))
                var, order = _split_ident(name, pos2)
                if order:
                    raise ParseError("only order-0 jets can be inverted", pos2)
                self.i += 1
                self.take(")")
                return inv(var)
            self.i += 1
            var, order = _split_ident(text, pos)
            return jet(var, order)
        if kind == "punct" and text in "([{":
            self.i += 1
            first = self.expr()
            if text == "(":
                self.take(")")
                return first
            self.take(",")
            second = self.expr()
            self.take("]" if text == "[" else "}")
            return commutator(first, second) if text == "[" else anticommutator(first, second)
        expected = frozenset({"identifier", "inv(", "D(", "(", "[", "{"})
        what = "end of input" if kind == "end" else repr(text)
        raise ParseError(f"unexpected {what}", pos, expected)


def _split_ident(text: str, pos: int) -> tuple[str, int]:
    m = _IDENT.match(text)
    if m is None:
        raise ParseError(f"malformed identifier {text!r}", pos)
    name, xs, digits = m.groups()
    if xs:
        return name, len(xs)
    if digits:
        return name, int(digits)
    return name, 0


def parse(text: str) -> NCPoly:
    """Parse ``text`` into a normalized polynomial; raises ParseError."""
    p = _Parser(text)
    kind, tok, pos = p.tok
    if kind == "end":
        raise ParseError("empty expression", pos, frozenset({"identifier", "number"}))
    result = p.expr()
    kind, tok, pos = p.tok
    if kind != "end":
        raise ParseError(f"unexpected {tok!r}", pos, frozenset({"+", "-", "*", "end of input"}))
    return result


parse_expr = parse
