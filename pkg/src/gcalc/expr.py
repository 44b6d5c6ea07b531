"""Expression trees over spatial variables and the gauge.

Nodes are frozen dataclasses, so structural equality is ``==``.  The
printer inserts only the parentheses precedence requires; parsing the
printed text gives back an equal tree.

Distribution nodes (``delta``, ``heaviside``, ``sign``, ``abs``) are
placeholders until :func:`lower` replaces them by scaled mollifier
profiles of a chosen order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from fractions import Fraction

import mpmath
import numpy as np

from . import config
from .errors import DomainError, EmbeddingError
from .idempotent import Idempotent
from .mollifier import mollifier_build

VARIABLES = ("x", "y", "z", "t")
FUNCTIONS = ("sin", "cos", "exp", "atan")
DISTRIBUTIONS = ("delta", "heaviside", "sign", "abs")


class Expr:
    """Base class; arithmetic operators build trees."""

    def __add__(self, other):
        return BinOp("+", self, wrap(other))

    def __radd__(self, other):
        return BinOp("+", wrap(other), self)

    def __sub__(self, other):
        return BinOp("-", self, wrap(other))

    def __rsub__(self, other):
        return BinOp("-", wrap(other), self)

    def __mul__(self, other):
        return BinOp("*", self, wrap(other))

    def __rmul__(self, other):
        return BinOp("*", wrap(other), self)

    def __truediv__(self, other):
        return BinOp("/", self, wrap(other))

    def __rtruediv__(self, other):
        return BinOp("/", wrap(other), self)

    def __neg__(self):
        return BinOp("*", Const(-1.0), self)

    def __pow__(self, n):
        return Pow(self, Fraction(n))

    def children(self) -> tuple[Expr, ...]:
        return tuple(getattr(self, f.name) for f in fields(self) if isinstance(getattr(self, f.name), Expr))

    def map(self, fn) -> Expr:
        """Rebuild with ``fn`` applied to every direct child."""
        changes = {f.name: fn(getattr(self, f.name)) for f in fields(self) if isinstance(getattr(self, f.name), Expr)}
        return replace(self, **changes) if changes else self

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Const(Expr):
    value: float

    def __post_init__(self):
        object.__setattr__(self, "value", float(self.value))


@dataclass(frozen=True, eq=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, eq=True)
class Eps(Expr):
    pass


@dataclass(frozen=True, eq=True)
class Alpha(Expr):
    r: Fraction

    def __post_init__(self):
        object.__setattr__(self, "r", Fraction(self.r))


@dataclass(frozen=True, eq=True)
class BinOp(Expr):
    op: str
    left: Expr
    right: Expr


@dataclass(frozen=True, eq=True)
class Pow(Expr):
    base: Expr
    exp: Fraction

    def __post_init__(self):
        object.__setattr__(self, "exp", Fraction(self.exp))


@dataclass(frozen=True, eq=True)
class Func(Expr):
    name: str
    arg: Expr


@dataclass(frozen=True, eq=True)
class Rho(Expr):
    """``m``-th derivative of the order-``q`` mollifier (``q=None``: configured order)."""

    arg: Expr
    m: int = 0
    q: int | None = None


@dataclass(frozen=True, eq=True)
class RhoInt(Expr):
    """``j``-th antiderivative of the mollifier from ``-inf`` (``j`` in 1, 2)."""

    arg: Expr
    j: int = 1
    q: int | None = None


@dataclass(frozen=True, eq=True)
class Dist(Expr):
    kind: str
    arg: Expr
    m: int = 0


@dataclass(frozen=True, eq=True)
class Quanta(Expr):
    arg: Expr


@dataclass(frozen=True, eq=True)
class Idem(Expr):
    e: Idempotent


@dataclass(frozen=True, eq=True)
class Interleave(Expr):
    e: Idempotent
    a: Expr
    b: Expr


def wrap(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, np.floating, np.integer)):
        return Const(float(value))
    if isinstance(value, Fraction):
        return Const(float(value))
    raise TypeError(f"cannot build an expression from {value!r}")


X = Var("x")
T = Var("t")
EPS = Eps()


# ---------------------------------------------------------------------------
# printing

_SUM, _PROD, _UNARY, _POW, _ATOM = 1, 2, 3, 4, 5


def _rat(r: Fraction) -> str:
    return str(r.numerator) if r.denominator == 1 else f"{r.numerator}/{r.denominator}"


def _is_neg_one(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == -1.0


def _prec(e: Expr) -> int:
    if isinstance(e, BinOp):
        if e.op in "+-":
            return _SUM
        if e.op == "*" and _is_neg_one(e.left) and not _starts_with_number(e.right):
            return _UNARY
        return _PROD
    if isinstance(e, Const) and (e.value < 0 or math.copysign(1.0, e.value) < 0):
        return _UNARY
    if isinstance(e, Pow):
        return _POW
    return _ATOM


def _starts_with_number(e: Expr) -> bool:
    """True when the printed form of ``e`` begins with a digit."""
    while True:
        if isinstance(e, Const):
            return e.value >= 0 and math.copysign(1.0, e.value) > 0
        if isinstance(e, Pow) and _prec(e.base) == _ATOM:
            e = e.base
            continue
        if isinstance(e, BinOp) and _prec(e) != _UNARY and _prec(e.left) >= (_SUM if e.op in "+-" else _PROD):
            e = e.left
            continue
        return False


def _paren(e: Expr, need: int) -> str:
    text = to_text(e)
    return f"({text})" if _prec(e) < need else text


def to_text(e: Expr) -> str:
    if isinstance(e, Const):
        return repr(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Eps):
        return "eps"
    if isinstance(e, Alpha):
        return f"alpha({_rat(e.r)})"
    if isinstance(e, BinOp):
        if e.op in "+-":
            return f"{_paren(e.left, _SUM)} {e.op} {_paren(e.right, _PROD)}"
        if _prec(e) == _UNARY:
            return "-" + _paren(e.right, _UNARY)
        return f"{_paren(e.left, _PROD)}{e.op}{_paren(e.right, _UNARY)}"
    if isinstance(e, Pow):
        r = e.exp
        ex = _rat(r) if r.denominator == 1 else f"({_rat(r)})"
        return f"{_paren(e.base, _ATOM)}^{ex}"
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Rho):
        extra = "" if (e.m == 0 and e.q is None) else (f", {e.m}" if e.q is None else f", {e.m}, {e.q}")
        return f"rho({to_text(e.arg)}{extra})"
    if isinstance(e, RhoInt):
        extra = "" if (e.j == 1 and e.q is None) else (f", {e.j}" if e.q is None else f", {e.j}, {e.q}")
        return f"Rho({to_text(e.arg)}{extra})"
    if isinstance(e, Dist):
        extra = f", {e.m}" if e.m else ""
        return f"{e.kind}({to_text(e.arg)}{extra})"
    if isinstance(e, Quanta):
        return f"quanta({to_text(e.arg)})"
    if isinstance(e, Idem):
        return f'idem("{e.e.pre}","{e.e.per}")'
    if isinstance(e, Interleave):
        return f'interleave(idem("{e.e.pre}","{e.e.per}"), {to_text(e.a)}, {to_text(e.b)})'
    raise TypeError(f"unknown node {e!r}")


# ---------------------------------------------------------------------------
# structure helpers


def walk(e: Expr):
    yield e
    for c in e.children():
        yield from walk(c)


def variables(e: Expr) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, Var)}


def contains(e: Expr, *types) -> bool:
    return any(isinstance(n, types) for n in walk(e))


def substitute(e: Expr, mapping: dict[str, Expr]) -> Expr:
    if isinstance(e, Var) and e.name in mapping:
        return wrap(mapping[e.name])
    return e.map(lambda c: substitute(c, mapping))


def depends_on(e: Expr, var: str) -> bool:
    return var in variables(e)


# smart constructors that fold trivial constants


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and a.value == 0:
        return b
    if isinstance(b, Const) and b.value == 0:
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    return BinOp("+", a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const) and b.value == 0:
        return a
    if isinstance(a, Const) and a.value == 0:
        return neg(b)
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    return BinOp("-", a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and a.value == 0 or isinstance(b, Const) and b.value == 0:
        return Const(0.0)
    if isinstance(a, Const) and a.value == 1:
        return b
    if isinstance(b, Const) and b.value == 1:
        return a
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    return BinOp("*", a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and a.value == 0:
        return Const(0.0)
    if isinstance(b, Const) and b.value == 1:
        return a
    return BinOp("/", a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    return BinOp("*", Const(-1.0), a)


def power(a: Expr, n) -> Expr:
    n = Fraction(n)
    if n == 0:
        return Const(1.0)
    if n == 1:
        return a
    return Pow(a, n)


# ---------------------------------------------------------------------------
# differentiation


def diff(e: Expr, var: str = "x") -> Expr:
    """Symbolic partial derivative; the gauge is held fixed."""
    if isinstance(e, (Const, Eps, Alpha, Idem)):
        return Const(0.0)
    if isinstance(e, Var):
        return Const(1.0 if e.name == var else 0.0)
    if isinstance(e, BinOp):
        da, db = diff(e.left, var), diff(e.right, var)
        if e.op == "+":
            return add(da, db)
        if e.op == "-":
            return sub(da, db)
        if e.op == "*":
            return add(mul(da, e.right), mul(e.left, db))
        # quotient rule, with the common case of a constant denominator
        if not depends_on(e.right, var):
            return div(da, e.right)
        return div(sub(mul(da, e.right), mul(e.left, db)), power(e.right, 2))
    if isinstance(e, Pow):
        du = diff(e.base, var)
        return mul(mul(Const(float(e.exp)), power(e.base, e.exp - 1)), du)
    chain = diff(e.arg, var) if hasattr(e, "arg") else None
    if isinstance(e, Func):
        u = e.arg
        if e.name == "sin":
            outer = Func("cos", u)
        elif e.name == "cos":
            outer = neg(Func("sin", u))
        elif e.name == "exp":
            outer = e
        else:
            outer = div(Const(1.0), add(Const(1.0), power(u, 2)))
        return mul(outer, chain)
    if isinstance(e, Rho):
        return mul(Rho(e.arg, e.m + 1, e.q), chain)
    if isinstance(e, RhoInt):
        inner = Rho(e.arg, 0, e.q) if e.j == 1 else RhoInt(e.arg, e.j - 1, e.q)
        return mul(inner, chain)
    if isinstance(e, Dist):
        if e.kind == "delta":
            outer = Dist("delta", e.arg, e.m + 1)
        elif e.kind == "heaviside":
            outer = Dist("delta", e.arg)
        elif e.kind == "sign":
            outer = mul(Const(2.0), Dist("delta", e.arg))
        else:
            outer = Dist("sign", e.arg)
        return mul(outer, chain)
    if isinstance(e, Quanta):
        # the quanta function has derivative zero everywhere
        return Const(0.0)
    if isinstance(e, Interleave):
        return Interleave(e.e, diff(e.a, var), diff(e.b, var))
    raise TypeError(f"cannot differentiate {e!r}")


# ---------------------------------------------------------------------------
# lowering distributions to mollifier profiles


def lower(e: Expr, q: int | None = None) -> Expr:
    """Replace distribution placeholders by their order-``q`` embeddings.

    ``delta(u, m) -> eps^(-1-m) rho^(m)(u/eps)``, ``heaviside(u) -> R(u/eps)``,
    ``sign = 2 heaviside - 1`` and ``abs(u) -> 2 eps S(u/eps) - u`` with
    ``S`` the second antiderivative of ``rho``.
    """
    q = config.current().mollifier_order if q is None else q
    if isinstance(e, Dist):
        u = lower(e.arg, q)
        scaled = BinOp("/", u, EPS)
        if e.kind == "delta":
            return BinOp("*", Alpha(Fraction(-1 - e.m)), Rho(scaled, e.m, q))
        if e.kind == "heaviside":
            return RhoInt(scaled, 1, q)
        if e.kind == "sign":
            return BinOp("-", BinOp("*", Const(2.0), RhoInt(scaled, 1, q)), Const(1.0))
        if e.kind == "abs":
            return BinOp("-", BinOp("*", BinOp("*", Const(2.0), EPS), RhoInt(scaled, 2, q)), u)
        raise EmbeddingError(f"unknown distribution {e.kind!r}")
    if isinstance(e, (Rho, RhoInt)) and e.q is None:
        return replace(e, arg=lower(e.arg, q), q=q)
    return e.map(lambda c: lower(c, q))


# ---------------------------------------------------------------------------
# numeric evaluation


def _profile(e, default_q):
    spec = mollifier_build(e.q if e.q is not None else default_q)
    if isinstance(e, Rho):
        return spec.derivative(e.m)
    if e.j not in (1, 2):
        raise EmbeddingError("only the first two antiderivatives of the mollifier are available")
    return spec.antiderivative(e.j)


def eval_array(e: Expr, env: dict, eps, ks=None, q: int | None = None):
    """Vectorized float evaluation.

    ``env`` maps variable names to arrays; ``eps`` (and ``ks``, needed for
    idempotents) broadcast against them.
    """
    q = config.current().mollifier_order if q is None else q
    if ks is None:
        ks = np.rint(-np.log2(eps))

    def ev(n):
        if isinstance(n, Const):
            return n.value
        if isinstance(n, Var):
            try:
                return env[n.name]
            except KeyError:
                raise DomainError(f"no value for variable {n.name!r}") from None
        if isinstance(n, Eps):
            return eps
        if isinstance(n, Alpha):
            return np.power(eps, float(n.r))
        if isinstance(n, BinOp):
            a, b = ev(n.left), ev(n.right)
            if n.op == "+":
                return a + b
            if n.op == "-":
                return a - b
            if n.op == "*":
                return a * b
            with np.errstate(divide="ignore", invalid="ignore"):
                return a / b
        if isinstance(n, Pow):
            base = ev(n.base)
            if n.exp.denominator == 1:
                with np.errstate(divide="ignore"):
                    return np.power(np.asarray(base, dtype=float), int(n.exp))
            return np.power(np.asarray(base, dtype=float), float(n.exp))
        if isinstance(n, Func):
            return getattr(np, "arctan" if n.name == "atan" else n.name)(ev(n.arg))
        if isinstance(n, (Rho, RhoInt)):
            return _profile(n, q)(ev(n.arg))
        if isinstance(n, Dist):
            return ev(lower(n, q))
        if isinstance(n, Quanta):
            u = np.asarray(ev(n.arg), dtype=float)
            # a classical nonzero real has valuation 0
            return np.where(u == 0, 0.0, 1.0)
        if isinstance(n, Idem):
            return n.e.mask(np.asarray(ks, dtype=np.int64)).astype(float)
        if isinstance(n, Interleave):
            m = n.e.mask(np.asarray(ks, dtype=np.int64))
            return np.where(m, ev(n.a), ev(n.b))
        raise TypeError(f"cannot evaluate {n!r}")

    return ev(e)


def eval_mp(e: Expr, env: dict, k: int, q: int | None = None):
    """Scalar ``mpmath`` evaluation at lattice index ``k``."""
    q = config.current().mollifier_order if q is None else q
    eps = mpmath.mpf(2) ** (-k)

    def ev(n):
        if isinstance(n, Const):
            return mpmath.mpf(n.value)
        if isinstance(n, Var):
            try:
                return env[n.name]
            except KeyError:
                raise DomainError(f"no value for variable {n.name!r}") from None
        if isinstance(n, Eps):
            return eps
        if isinstance(n, Alpha):
            return eps ** (mpmath.mpf(n.r.numerator) / n.r.denominator)
        if isinstance(n, BinOp):
            a, b = ev(n.left), ev(n.right)
            return {"+": lambda: a + b, "-": lambda: a - b, "*": lambda: a * b, "/": lambda: a / b}[n.op]()
        if isinstance(n, Pow):
            base = ev(n.base)
            if n.exp.denominator == 1:
                return base ** int(n.exp)
            return base ** (mpmath.mpf(n.exp.numerator) / n.exp.denominator)
        if isinstance(n, Func):
            return getattr(mpmath, n.name)(ev(n.arg))
        if isinstance(n, (Rho, RhoInt)):
            return _profile(n, q).mp(ev(n.arg))
        if isinstance(n, Dist):
            return ev(lower(n, q))
        if isinstance(n, Quanta):
            return mpmath.mpf(0 if ev(n.arg) == 0 else 1)
        if isinstance(n, Idem):
            return mpmath.mpf(n.e(k))
        if isinstance(n, Interleave):
            return ev(n.a) if n.e(k) else ev(n.b)
        raise TypeError(f"cannot evaluate {n!r}")

    return ev(e)
