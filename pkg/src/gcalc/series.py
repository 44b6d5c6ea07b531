"""Exact-tier evaluation of expressions at generalized points.

Functions act branch by branch.  At a finite branch ``c + h`` (``h``
infinitesimal) they expand in a Taylor series in ``h``; at an infinite
branch they use the asymptotics of each function:

* ``sin``/``cos`` of ``m * alpha_{-r} + finite`` with integer ``m`` become
  oscillatory terms,
* ``exp`` of a branch tending to ``-inf`` is negligible, to ``+inf`` is
  not moderate,
* ``atan(u) = +-pi/2 - atan(1/u)``,
* mollifier profiles keep only their polynomial tail.

Anything outside this catalog falls back to sampling the lattice.
"""

from __future__ import annotations

import math
import warnings
from fractions import Fraction

import numpy as np

from . import config
from .errors import DomainError, EmpiricalFallbackWarning, ModerateError, NotInvertibleError, UndecidableError
from .expr import (
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
    _profile,
    eval_array,
    eval_mp,
    lower,
)
from .gauge import INF, Branch, GaugeExpansion, TrigTerm, _series_in, _series_len
from .mollifier import GaussPoly
from .number import GeneralizedNumber, as_number, estimate_valuation, fractional_power, invert


class NeedsSampling(Exception):
    """The exact tier cannot represent an intermediate result."""


def _taylor_coeffs(name, c: float, n: int) -> list[float]:
    fact = [math.factorial(j) for j in range(n)]
    if name == "sin":
        return [math.sin(c + j * math.pi / 2) / fact[j] for j in range(n)]
    if name == "cos":
        return [math.cos(c + j * math.pi / 2) / fact[j] for j in range(n)]
    if name == "exp":
        return [math.exp(c) / fact[j] for j in range(n)]
    if name == "atan0":
        return [0.0 if j % 2 == 0 else (-1.0) ** (j // 2) / j for j in range(n)]
    if isinstance(name, GaussPoly):
        return name.taylor(c, n)
    raise ValueError(name)


def _compose(name, c: float, h: GaugeExpansion) -> GaugeExpansion:
    """``f(c + h)`` for infinitesimal ``h``."""
    window = config.current().order_window
    if h.is_zero:
        f0 = _taylor_coeffs(name, c, 1)[0]
        if h.is_exact:
            return GaugeExpansion.constant(f0) if f0 else GaugeExpansion()
        return GaugeExpansion(((f0, Fraction(0)),) if f0 else (), h.order)
    n = max(_series_len(h, window), 2)
    return _series_in(h, _taylor_coeffs(name, c, n), window)


def _finite_split(poly: GaugeExpansion) -> tuple[float, GaugeExpansion]:
    if poly.order <= 0:
        raise UndecidableError("constant term of the argument is unknown")
    c = poly.coefficient(0)
    return c, poly - GaugeExpansion.constant(c) if c else poly


def _atan_poly(poly: GaugeExpansion) -> GaugeExpansion:
    if poly.low >= 0:
        c, h = _finite_split(poly)
        if c == 0:
            return _compose("atan0", 0.0, h)
        # atan(c + h) = atan(c) + atan(h / (1 + c^2 + c h))
        g = h * (GaugeExpansion.constant(1 + c * c) + h.scale(c)).invert()
        return _compose("atan0", 0.0, g) + math.atan(c)
    sign = 1.0 if poly.leading[0] > 0 else -1.0
    return GaugeExpansion.constant(sign * math.pi / 2) - _compose("atan0", 0.0, poly.invert())


def _poly_eval(coeffs, u: GaugeExpansion) -> GaugeExpansion:
    acc = GaugeExpansion()
    for c in reversed(coeffs):
        acc = acc * u + float(c)
    return acc


def apply_branch(name, b: Branch) -> Branch:
    """Apply ``name`` (a function name or a :class:`GaussPoly`) to one branch."""
    if b.trig:
        raise NeedsSampling("function of an oscillatory branch")
    poly = b.poly
    if poly.is_zero and not poly.is_exact and poly.order <= 0:
        raise UndecidableError("argument is unknown")
    if poly.low >= 0:
        if name == "atan":
            return Branch(_atan_poly(poly))
        c, h = _finite_split(poly)
        return Branch(_compose(name, c, h))
    # infinite branch
    lead = poly.leading[0]
    if name == "exp":
        if lead < 0:
            return Branch()
        raise ModerateError("not alpha-bounded: exp of a positive infinite argument")
    if name == "atan":
        return Branch(_atan_poly(poly))
    if isinstance(name, GaussPoly):
        return Branch(_poly_eval(name.tail_poly, poly)) if lead > 0 else Branch()
    big, rest = poly.split(0)
    if len(big.terms) != 1:
        raise NeedsSampling("phase with several infinite terms")
    m, e = big.terms[0]
    if m != round(m):
        raise NeedsSampling("phase multiplier is not an integer")
    mult, sgn = int(abs(m)), (1.0 if m > 0 else -1.0)
    c, h = _finite_split(rest)
    cos_r = _compose("cos", c, h)
    sin_r = _compose("sin", c, h)
    rate = -e
    if name == "sin":
        # sin(N + R) = sin N cos R + cos N sin R
        terms = (TrigTerm(cos_r.scale(sgn), "sin", mult, rate), TrigTerm(sin_r, "cos", mult, rate))
    else:
        # cos(N + R) = cos N cos R - sin N sin R
        terms = (TrigTerm(cos_r, "cos", mult, rate), TrigTerm(sin_r.scale(-sgn), "sin", mult, rate))
    return Branch(GaugeExpansion(), tuple(t for t in terms if not (t.amplitude.is_zero and t.amplitude.is_exact)))


def apply_function(name, x) -> GeneralizedNumber:
    x = as_number(x)
    if not x.exact:
        raise NeedsSampling("empirical argument")
    return x.scale_parts(lambda b: apply_branch(name, b))


# ---------------------------------------------------------------------------


def eval_exact(e: Expr, env: dict, q: int | None = None) -> GeneralizedNumber:
    """Evaluate ``e`` with variables bound to exact-tier numbers.

    Raises :class:`NeedsSampling` when an intermediate leaves the exact tier.
    """
    q = config.current().mollifier_order if q is None else q

    def ev(n):
        if isinstance(n, Const):
            return GeneralizedNumber.real(n.value)
        if isinstance(n, Var):
            try:
                v = as_number(env[n.name])
            except KeyError:
                raise DomainError(f"no value for variable {n.name!r}") from None
            if not v.exact:
                raise NeedsSampling("empirical argument")
            return v
        if isinstance(n, Eps):
            return GeneralizedNumber.alpha(1)
        if isinstance(n, Alpha):
            return GeneralizedNumber.alpha(n.r)
        if isinstance(n, BinOp):
            a, b = ev(n.left), ev(n.right)
            if n.op == "+":
                return a + b
            if n.op == "-":
                return a - b
            if n.op == "*":
                return a * b
            try:
                return a * invert(b)
            except UndecidableError as exc:
                raise NeedsSampling(str(exc)) from exc
        if isinstance(n, Pow):
            base = ev(n.base)
            if n.exp.denominator == 1:
                return base ** int(n.exp)
            try:
                return fractional_power(base, n.exp)
            except (UndecidableError, ValueError) as exc:
                raise NeedsSampling(str(exc)) from exc
        if isinstance(n, Func):
            return apply_function(n.name, ev(n.arg))
        if isinstance(n, (Rho, RhoInt)):
            return apply_function(_profile(n, q), ev(n.arg))
        if isinstance(n, Dist):
            return ev(lower(n, q))
        if isinstance(n, Quanta):
            from .calculus import quanta_eval

            return quanta_eval(ev(n.arg))
        if isinstance(n, Idem):
            return GeneralizedNumber.from_idempotent(n.e)
        if isinstance(n, Interleave):
            return GeneralizedNumber.interleave([(n.e, ev(n.a)), (~n.e, ev(n.b))])
        raise TypeError(f"cannot evaluate {n!r}")

    return ev(e)


def eval_sampled(e: Expr, env: dict, q: int | None = None, depth: int | None = None, dps: int | None = None):
    """Empirical tier: sample ``e`` on the lattice ``k = 1..depth``."""
    depth = depth or config.current().lattice_depth
    if dps is None:
        ks = np.arange(1, depth + 1)
        arrays = {name: as_number(v).sample(depth) for name, v in env.items()}
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.asarray(eval_array(e, arrays, np.exp2(-ks.astype(float)), ks, q), dtype=float)
        vals = np.broadcast_to(vals, ks.shape).copy()
        return GeneralizedNumber(samples=vals)
    import mpmath

    out = np.empty(depth, dtype=object)
    with mpmath.workdps(dps):
        nums = {name: as_number(v) for name, v in env.items()}
        for k in range(1, depth + 1):
            local = {name: v.sample_at(k, mp=True) for name, v in nums.items()}
            out[k - 1] = eval_mp(e, local, k, q)
    return GeneralizedNumber(samples=out)


def evaluate_expr(e: Expr, env: dict | None = None, q: int | None = None, tier: str = "auto", dps: int | None = None):
    """Exact evaluation when representable, otherwise lattice sampling."""
    env = env or {}
    if tier in ("auto", "exact"):
        try:
            return eval_exact(e, env, q)
        except NeedsSampling as exc:
            if tier == "exact":
                raise UndecidableError(f"not representable in the exact tier: {exc}") from exc
            warnings.warn(f"exact tier unavailable ({exc}); sampling the lattice", EmpiricalFallbackWarning, stacklevel=2)
    result = eval_sampled(e, env, q, dps=dps)
    s = np.asarray(result.samples)
    finite = np.array([np.isfinite(float(v)) for v in s]) if s.dtype == object else np.isfinite(s)
    tail = finite[config.current().window_start - 1 :]
    if not tail.all():
        raise ModerateError("not alpha-bounded: samples overflow on the lattice")
    return result
