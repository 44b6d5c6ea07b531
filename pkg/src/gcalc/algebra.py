"""Rational normal form of expressions over atoms.

Variables and gauge powers are the polynomial generators; every other
subexpression (``sin(...)``, ``rho(...)``, fractional powers of sums)
becomes an opaque atom keyed by its structure.  Coefficients are exact
rationals, so a difference like ``f - (f + alpha(1))`` cancels to
``-alpha(1)`` without floating-point residue, and an identity holds
symbolically iff the numerator of its normal form is empty.
"""

from __future__ import annotations

from fractions import Fraction

from .expr import Alpha, BinOp, Const, Eps, Expr, Pow, Var, power, to_text

_EPS = ("eps",)

Poly = dict  # monomial (sorted tuple of (key, exponent)) -> Fraction


def _mono_mul(a: tuple, b: tuple) -> tuple:
    exps: dict = {}
    for key, e in a + b:
        exps[key] = exps.get(key, Fraction(0)) + e
    return tuple(sorted(((k, e) for k, e in exps.items() if e != 0), key=_key_order))


def _key_order(item):
    key = item[0]
    return (0, "") if key == _EPS else (1, key[0], to_text(key[1]) if key[0] == "atom" else key[1])


def _const(c) -> Poly:
    c = Fraction(c)
    return {(): c} if c else {}


def _gen(key, e=Fraction(1)) -> Poly:
    return {((key, Fraction(e)),): Fraction(1)}


def padd(p: Poly, q: Poly, sign: int = 1) -> Poly:
    out = dict(p)
    for m, c in q.items():
        v = out.get(m, Fraction(0)) + sign * c
        if v:
            out[m] = v
        else:
            out.pop(m, None)
    return out


def pmul(p: Poly, q: Poly) -> Poly:
    out: Poly = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            m = _mono_mul(m1, m2)
            v = out.get(m, Fraction(0)) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    return out


def ppow(p: Poly, n: int) -> Poly:
    out = _const(1)
    for _ in range(n):
        out = pmul(out, p)
    return out


def normal_form(e: Expr) -> tuple[Poly, Poly]:
    """``(numerator, denominator)`` polynomials over the atoms of ``e``."""
    if isinstance(e, Const):
        return _const(Fraction(e.value)), _const(1)
    if isinstance(e, Var):
        return _gen(("var", e.name)), _const(1)
    if isinstance(e, Eps):
        return _gen(_EPS), _const(1)
    if isinstance(e, Alpha):
        return (_gen(_EPS, e.r) if e.r else _const(1)), _const(1)
    if isinstance(e, BinOp):
        n1, d1 = normal_form(e.left)
        n2, d2 = normal_form(e.right)
        if e.op in "+-":
            if d1 == d2:
                return padd(n1, n2, 1 if e.op == "+" else -1), d1
            return padd(pmul(n1, d2), pmul(n2, d1), 1 if e.op == "+" else -1), pmul(d1, d2)
        if e.op == "*":
            return pmul(n1, n2), pmul(d1, d2)
        if not n2:
            raise ZeroDivisionError("division by an identically zero expression")
        return pmul(n1, d2), pmul(d1, n2)
    if isinstance(e, Pow):
        n, d = normal_form(e.base)
        if e.exp.denominator == 1:
            k = int(e.exp)
            return (ppow(n, k), ppow(d, k)) if k >= 0 else (ppow(d, -k), ppow(n, -k))
        # monomial with unit coefficient: scale exponents
        if len(n) == 1 and d == _const(1):
            (m, c), = n.items()
            if c == 1:
                return {tuple((key, ex * e.exp) for key, ex in m): Fraction(1)}, _const(1)
        return _gen(("atom", Pow(simplify(e.base), e.exp))), _const(1)
    return _gen(("atom", e.map(simplify))), _const(1)


def _mono_expr(m: tuple) -> Expr | None:
    out = None
    for key, ex in m:
        if key == _EPS:
            base = Alpha(ex) if ex != 1 else Eps()
        else:
            node = Var(key[1]) if key[0] == "var" else key[1]
            base = power(node, ex)
        out = base if out is None else BinOp("*", out, base)
    return out


def poly_expr(p: Poly) -> Expr:
    if not p:
        return Const(0.0)
    out = None
    for m in sorted(p, key=lambda m: [_key_order(i) + (float(i[1]),) for i in m]):
        c = float(p[m])
        body = _mono_expr(m)
        if body is None:
            term = Const(c)
        elif c == 1:
            term = body
        elif c == -1 and out is not None:
            out = BinOp("-", out, body)
            continue
        else:
            term = BinOp("*", Const(c), body)
        out = term if out is None else BinOp("+", out, term)
    return out


def simplify(e: Expr) -> Expr:
    """Rebuild ``e`` from its normal form (like terms collected)."""
    n, d = normal_form(e)
    if not n:
        return Const(0.0)
    if d == _const(1):
        return poly_expr(n)
    return BinOp("/", poly_expr(n), poly_expr(d))


def is_identically_zero(e: Expr) -> bool:
    n, _ = normal_form(e)
    return not n
