"""Recursive-descent parser for the expression language.

Grammar::

    expr     := term (("+" | "-") term)*
    term     := factor (("*" | "/") factor)*
    factor   := "-" factor | power
    power    := atom ("^" exponent)?
    exponent := ["-"] INT | "(" ["-"] INT ["/" INT] ")"
    atom     := NUMBER | "eps" | "pi" | "alpha" "(" rational ")" | VAR
              | IDENT "(" expr {"," expr} ")" | "idem" "(" STRING "," STRING ")"
              | "(" expr ")"

A minus sign directly before a number literal folds into a negative
constant unless the literal is raised to a power (``-2^2`` is ``-(2^2)``).
Region literals ``box(lo..., hi...)`` and ``ball(c..., r)`` are parsed by
:func:`parse_region`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ParseError
from .expr import (
    DISTRIBUTIONS,
    FUNCTIONS,
    VARIABLES,
    Alpha,
    BinOp,
    Const,
    Dist,
    Eps,
    Expr,
    Func,
    Idem,
    Interleave,
    Pow,
    Quanta,
    Rho,
    RhoInt,
    Var,
)
from .idempotent import Idempotent

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<string>"[^"\n]*")
  | (?P<op>[-+*/^(),])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    column: int


def tokenize(source: str) -> list[Token]:
    out, pos, line, col0 = [], 0, 1, 0
    while pos < len(source):
        m = _TOKEN.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - col0 + 1)
        kind = m.lastgroup
        if kind == "nl":
            line, col0 = line + 1, m.end()
        elif kind != "ws":
            out.append(Token(kind, m.group(), line, pos - col0 + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - col0 + 1))
    return out


class Parser:
    def __init__(self, source: str):
        self.tokens = tokenize(source)
        self.i = 0

    # -- token helpers ---------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, n: int = 1) -> Token:
        return self.tokens[min(self.i + n, len(self.tokens) - 1)]

    def error(self, expected, message=None):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ParseError(message or f"unexpected {found}", t.line, t.column, expected)

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "ident") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        t = self.tok
        if not self.accept(text):
            self.error([text])
        return t

    def expect_kind(self, kind: str, label: str) -> Token:
        t = self.tok
        if t.kind != kind:
            self.error([label])
        self.i += 1
        return t

    # -- grammar ---------------------------------------------------------

    def parse_all(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "eof":
            self.error(["+", "-", "*", "/", "^", "end of input"])
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.tok.kind == "op" and self.tok.text in "+-":
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.term())
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.tok.kind == "op" and self.tok.text in "*/":
            op = self.tok.text
            self.i += 1
            e = BinOp(op, e, self.factor())
        return e

    def factor(self) -> Expr:
        if self.tok.kind == "op" and self.tok.text == "-":
            nxt, after = self.peek(1), self.peek(2)
            if nxt.kind == "number" and not (after.kind == "op" and after.text == "^"):
                self.i += 2
                return Const(-float(nxt.text))
            self.i += 1
            return BinOp("*", Const(-1.0), self.factor())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.accept("^"):
            return Pow(base, self.exponent())
        return base

    def exponent(self) -> Fraction:
        if self.accept("("):
            r = self.rational()
            self.expect(")")
            return r
        sign = -1 if self.accept("-") else 1
        t = self.tok
        if t.kind != "number" or not t.text.isdigit():
            self.error(["integer", "("])
        self.i += 1
        return sign * Fraction(int(t.text))

    def rational(self) -> Fraction:
        sign = -1 if self.accept("-") else 1
        t = self.tok
        if t.kind != "number":
            self.error(["number"])
        self.i += 1
        value = Fraction(t.text)
        if self.accept("/"):
            d = self.tok
            if d.kind != "number" or not d.text.isdigit() or int(d.text) == 0:
                self.error(["positive integer"])
            self.i += 1
            value = value / int(d.text)
        return sign * value

    def integer(self) -> int:
        sign = -1 if self.accept("-") else 1
        t = self.tok
        if t.kind != "number" or not t.text.isdigit():
            self.error(["integer"])
        self.i += 1
        return sign * int(t.text)

    def string(self) -> str:
        t = self.expect_kind("string", "string")
        return t.text[1:-1]

    def idempotent(self) -> Idempotent:
        self.expect("idem")
        self.expect("(")
        pre = self.string()
        self.expect(",")
        per = self.string()
        self.expect(")")
        try:
            return Idempotent(pre, per)
        except ValueError as exc:
            raise ParseError(str(exc), self.tok.line, self.tok.column) from None

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "number":
            self.i += 1
            return Const(float(t.text))
        if t.kind == "op" and t.text == "(":
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        if t.kind != "ident":
            self.error(["number", "identifier", "(", "-"])
        name = t.text
        if name == "eps":
            self.i += 1
            return Eps()
        if name == "pi":
            self.i += 1
            return Const(math.pi)
        if name in VARIABLES:
            self.i += 1
            return Var(name)
        if name == "alpha":
            self.i += 1
            self.expect("(")
            r = self.rational()
            self.expect(")")
            return Alpha(r)
        if name == "idem":
            return Idem(self.idempotent())
        if name == "interleave":
            self.i += 1
            self.expect("(")
            e = self.idempotent()
            self.expect(",")
            a = self.expr()
            self.expect(",")
            b = self.expr()
            self.expect(")")
            return Interleave(e, a, b)
        if name in FUNCTIONS or name in DISTRIBUTIONS or name in ("rho", "Rho", "quanta"):
            self.i += 1
            self.expect("(")
            arg = self.expr()
            ints = []
            while self.accept(","):
                ints.append(self.integer())
            self.expect(")")
            return self._call(name, arg, ints, t)
        self.error(["number", "variable", "function name", "("], f"unknown identifier {name!r}")

    def _call(self, name, arg, ints, t):
        limit = {"rho": 2, "Rho": 2, "delta": 1}.get(name, 0)
        if len(ints) > limit:
            raise ParseError(f"too many arguments to {name}", t.line, t.column, [")"])
        if name in FUNCTIONS:
            return Func(name, arg)
        if name == "quanta":
            return Quanta(arg)
        if name == "rho":
            m = ints[0] if ints else 0
            if m < 0:
                raise ParseError("derivative order must be nonnegative", t.line, t.column)
            return Rho(arg, m, ints[1] if len(ints) > 1 else None)
        if name == "Rho":
            j = ints[0] if ints else 1
            if j not in (1, 2):
                raise ParseError("Rho takes antiderivative order 1 or 2", t.line, t.column)
            return RhoInt(arg, j, ints[1] if len(ints) > 1 else None)
        m = ints[0] if ints else 0
        if m < 0:
            raise ParseError("derivative order must be nonnegative", t.line, t.column)
        return Dist(name, arg, m)


def parse(source: str) -> Expr:
    """Parse one expression; raises :class:`ParseError` with position info."""
    return Parser(source).parse_all()


def parse_region(source: str):
    """Parse ``box(lo..., hi...)`` or ``ball(c..., r)`` into a region literal.

    Box arguments are ``lo_1, ..., lo_n, hi_1, ..., hi_n``; ball arguments
    are ``c_1, ..., c_n, r``.  Each argument is an expression, and
    ``inf``/``-inf`` denote unbounded sides.
    """
    from .internal import Region

    p = Parser(source)
    t = p.tok
    if t.kind != "ident" or t.text not in ("box", "ball"):
        p.error(["box", "ball"])
    kind = t.text
    p.i += 1
    p.expect("(")
    args = [_region_arg(p)]
    while p.accept(","):
        args.append(_region_arg(p))
    p.expect(")")
    if p.tok.kind != "eof":
        p.error(["end of input"])
    if kind == "box":
        if len(args) % 2:
            raise ParseError("box needs as many upper as lower bounds", t.line, t.column)
        n = len(args) // 2
        return Region("box", tuple(args[:n]), tuple(args[n:]))
    if len(args) < 2:
        raise ParseError("ball needs a center and a radius", t.line, t.column)
    return Region("ball", tuple(args[:-1]), (args[-1],))


def _region_arg(p: Parser):
    sign = 1
    if p.tok.kind == "op" and p.tok.text == "-" and p.peek().kind == "ident" and p.peek().text == "inf":
        p.i += 1
        sign = -1
    if p.tok.kind == "ident" and p.tok.text == "inf":
        p.i += 1
        return sign * math.inf
    e = p.expr()
    return e if sign == 1 else BinOp("*", Const(-1.0), e)
