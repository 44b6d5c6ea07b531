"""Generalized functions: embeddings, pointwise algebra, evaluation, pairing."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from . import config
from .errors import DomainError, EmbeddingError, ModerateError, QuadratureError
from .expr import (
    DISTRIBUTIONS,
    BinOp,
    Const,
    Dist,
    Expr,
    Quanta,
    Rho,
    RhoInt,
    Var,
    contains,
    diff,
    eval_array,
    eval_mp,
    lower,
    substitute,
    to_text,
    variables,
)
from .mollifier import mollifier_build
from .number import GeneralizedNumber, as_number, estimate_valuation, is_infinite
from .quadrature import gk_quad, mp_quad, scale_breakpoints
from .series import evaluate_expr

SMOOTH = "smooth"


def _as_expr(f) -> Expr:
    if isinstance(f, Expr):
        return f
    if isinstance(f, GeneralizedFunction):
        return f.expr
    if isinstance(f, str):
        from .parser import parse

        return parse(f)
    return Const(float(f))


def _tag_min(a, b):
    if a == SMOOTH:
        return b
    if b == SMOOTH:
        return a
    return min(a, b)


@dataclass(frozen=True)
class GeneralizedFunction:
    """An eps-parameterized smooth expression with an embedding-order tag.

    ``tag`` is ``"smooth"`` for embedded smooth functions and the mollifier
    order ``q`` for embedded distributions.
    """

    expr: Expr
    tag: int | str = SMOOTH
    domain: object = None
    growth: float | None = field(default=None, compare=False)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(sorted(variables(self.expr))) or ("x",)

    def __add__(self, other):
        return fn_add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return fn_add(self, fn_scale(other, -1.0))

    def __mul__(self, other):
        return fn_mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return fn_scale(self, -1.0)

    def __call__(self, *points, **named):
        return evaluate(self, *points, **named)

    def derivative(self, var: str = "x") -> GeneralizedFunction:
        return GeneralizedFunction(diff(self.expr, var), self.tag, self.domain)

    def sample(self, xs, ks, var: str = "x") -> np.ndarray:
        """Values on the grid ``ks`` x ``xs`` (rows are lattice indices)."""
        ks = np.asarray(ks)[:, None]
        eps = np.exp2(-ks.astype(float))
        q = None if self.tag == SMOOTH else self.tag
        with np.errstate(over="ignore", invalid="ignore"):
            vals = eval_array(self.expr, {var: np.asarray(xs, dtype=float)[None, :]}, eps, ks, q)
        return np.broadcast_to(vals, (ks.shape[0], len(xs))).astype(float)

    def to_json(self) -> dict:
        return {"expression": to_text(self.expr), "tag": self.tag}

    def __str__(self) -> str:
        return to_text(self.expr)


def _wrap_fn(f) -> GeneralizedFunction:
    if isinstance(f, GeneralizedFunction):
        return f
    return embed_smooth(f)


def _growth(expr: Expr, tag) -> float:
    """Declared growth exponent on the unit level: sup|f| <= 2^(k r)."""
    if variables(expr) - {"x"}:
        return math.nan
    from .calculus import sup_samples

    sups = sup_samples(GeneralizedFunction(expr, tag), level=1.0, grid=257)
    if not np.all(np.isfinite(sups)):
        raise ModerateError("not alpha-bounded: samples overflow on the unit level")
    v = estimate_valuation(sups)
    return 0.0 if v == math.inf else max(0.0, -v)


def embed_smooth(f, domain=None) -> GeneralizedFunction:
    """Constant-in-eps embedding of a smooth expression."""
    e = _as_expr(f)
    if contains(e, Dist, Rho, RhoInt, Quanta):
        raise EmbeddingError("expression is not smooth in the classical sense; use embed_distribution")
    return GeneralizedFunction(e, SMOOTH, domain, _growth(e, SMOOTH))


@dataclass(frozen=True)
class DistributionTag:
    kind: str
    m: int = 0

    def expr(self, var: str = "x") -> Expr:
        return Dist(self.kind, Var(var), self.m)

    @classmethod
    def from_text(cls, text: str) -> DistributionTag | None:
        base = text.rstrip("'")
        if base in DISTRIBUTIONS:
            m = len(text) - len(base)
            if m and base != "delta":
                return None
            return cls(base, m)
        return None


def embed_distribution(t, q: int | None = None, domain=None) -> GeneralizedFunction:
    """Embed a catalog distribution (or an expression containing them)."""
    q = config.current().mollifier_order if q is None else q
    mollifier_build(q)
    if isinstance(t, DistributionTag):
        e = t.expr()
    elif isinstance(t, str) and DistributionTag.from_text(t) is not None:
        e = DistributionTag.from_text(t).expr()
    else:
        e = _as_expr(t)
    if not contains(e, Dist, Rho, RhoInt):
        return embed_smooth(e, domain)
    lowered = lower(e, q)
    return GeneralizedFunction(lowered, q, domain, _growth(lowered, q))


def fn_add(f, g) -> GeneralizedFunction:
    f, g = _wrap_fn(f), _wrap_fn(g)
    return GeneralizedFunction(BinOp("+", f.expr, g.expr), _tag_min(f.tag, g.tag), f.domain or g.domain)


def fn_mul(f, g) -> GeneralizedFunction:
    f, g = _wrap_fn(f), _wrap_fn(g)
    return GeneralizedFunction(BinOp("*", f.expr, g.expr), _tag_min(f.tag, g.tag), f.domain or g.domain)


def fn_scale(f, c: float) -> GeneralizedFunction:
    f = _wrap_fn(f)
    return GeneralizedFunction(BinOp("*", Const(c), f.expr), f.tag, f.domain)


def fn_compose(f, g, var: str = "x", level: float = 1.0) -> GeneralizedFunction:
    """``f(g)``; the image of ``g`` must stay bounded along the lattice."""
    from .calculus import sup_samples

    f, g = _wrap_fn(f), _wrap_fn(g)
    sups = sup_samples(g, level=level, grid=257)
    tol = config.current().valuation_tolerance
    if not np.all(np.isfinite(sups)) or estimate_valuation(sups) < -tol:
        raise DomainError("image not compactly supported: the inner function grows along the lattice")
    return GeneralizedFunction(substitute(f.expr, {var: g.expr}), _tag_min(f.tag, g.tag), g.domain)


def _point_env(f: GeneralizedFunction, points, named) -> dict:
    if named:
        return {k: as_number(v) for k, v in named.items()}
    if len(points) == 1 and isinstance(points[0], dict):
        return {k: as_number(v) for k, v in points[0].items()}
    if len(points) == 1 and isinstance(points[0], (list, tuple)):
        points = tuple(points[0])
    names = f.variables
    if len(points) != len(names):
        raise DomainError(f"expected {len(names)} coordinates for variables {names}, got {len(points)}")
    return {n: as_number(p) for n, p in zip(names, points)}


def evaluate(f, *points, tier: str = "auto", dps: int | None = None, **named) -> GeneralizedNumber:
    """Value of ``f`` at a compactly supported generalized point."""
    f = _wrap_fn(f)
    env = _point_env(f, points, named)
    for name, p in env.items():
        if p.exact and is_infinite(p):
            raise DomainError(f"point coordinate {name} is not compactly supported")
    if f.domain is not None:
        from .internal import Membrane, membrane_member

        pt = tuple(env[n] for n in f.variables)
        if not membrane_member(pt if len(pt) > 1 else pt[0], Membrane(f.domain)):
            raise DomainError("point is not in the domain membrane")
    q = None if f.tag == SMOOTH else f.tag
    return evaluate_expr(f.expr, env, q, tier=tier, dps=dps)


# ---------------------------------------------------------------------------
# pairing


def pairing(t, phi, interval=(-8.0, 8.0), depth: int | None = None, dps: int | None = None,
            ks=None, var: str = "x") -> GeneralizedNumber:
    """Per-index integrals of ``t * phi`` over ``interval``.

    The float path uses adaptive Gauss-Kronrod with absolute tolerance from
    the configuration; ``dps`` switches to tanh-sinh in ``mpmath`` and
    returns ``mpf`` samples.  ``ks`` restricts the computed indices; other
    samples are NaN.
    """
    t = _wrap_fn(t)
    phi_e = _as_expr(phi)
    q = None if t.tag == SMOOTH else t.tag
    depth = depth or config.current().lattice_depth
    ks = list(range(1, depth + 1)) if ks is None else sorted(ks)
    lo, hi = map(float, interval)
    out = np.full(depth, np.nan, dtype=object if dps else float)
    for k in ks:
        eps = 2.0**-k
        pts = scale_breakpoints(lo, hi, eps)
        if dps is None:

            def integrand(x, k=k, eps=eps):
                env = {var: x}
                return eval_array(t.expr, env, eps, k, q) * eval_array(phi_e, env, eps, k, q)

            try:
                out[k - 1], _ = gk_quad(integrand, pts)
            except QuadratureError as exc:
                exc.diagnostics["k"] = k
                exc.diagnostics["hint"] = "cancellation exceeds double precision; pass dps for the mpmath path"
                raise
        else:

            def integrand(x, k=k):
                env = {var: x}
                return eval_mp(t.expr, env, k, q) * eval_mp(phi_e, env, k, q)

            with mpmath.workdps(dps):
                out[k - 1], _ = mp_quad(integrand, pts, dps)
    return GeneralizedNumber(samples=out)


def classical_pairing(t, phi, interval=(-8.0, 8.0), var: str = "x") -> float:
    """``<T | phi>`` for catalog distributions times smooth factors."""
    if isinstance(t, GeneralizedFunction):
        if t.tag != SMOOTH:
            raise EmbeddingError("classical pairing needs the distribution before embedding")
        t = t.expr
    if isinstance(t, str) and DistributionTag.from_text(t) is not None:
        e = DistributionTag.from_text(t).expr(var)
    else:
        e = _as_expr(t)
    phi_e = _as_expr(phi)
    lo, hi = map(float, interval)

    def smooth_at(expr, x):
        return float(eval_array(expr, {var: np.asarray(x, dtype=float)}, 1.0, 0))

    def integral(expr, a, b):
        return gk_quad(lambda x: eval_array(expr, {var: x}, 1.0, 0) + 0 * x, [a, b])[0]

    def term(node, factor):
        psi = BinOp("*", factor, phi_e)
        if isinstance(node, Dist):
            if node.arg != Var(var):
                raise EmbeddingError("classical pairing supports distributions of the bare variable only")
            if node.kind == "delta":
                d = psi
                for _ in range(node.m):
                    d = diff(d, var)
                return (-1) ** node.m * smooth_at(d, 0.0)
            if node.kind == "heaviside":
                return integral(psi, 0.0, hi)
            if node.kind == "sign":
                return integral(psi, 0.0, hi) - integral(psi, lo, 0.0)
            absx = BinOp("*", psi, Var(var))
            return integral(absx, 0.0, hi) - integral(absx, lo, 0.0)
        raise EmbeddingError("not a catalog distribution")

    def split(node, factor):
        if isinstance(node, BinOp) and node.op in "+-":
            sign = 1.0 if node.op == "+" else -1.0
            return split(node.left, factor) + sign * split(node.right, factor)
        if not contains(node, Dist):
            return integral(BinOp("*", factor, BinOp("*", node, phi_e)), lo, hi)
        if isinstance(node, Dist):
            return term(node, factor)
        if isinstance(node, BinOp) and node.op == "*":
            if not contains(node.left, Dist):
                return split(node.right, BinOp("*", factor, node.left))
            if not contains(node.right, Dist):
                return split(node.left, BinOp("*", factor, node.right))
        raise EmbeddingError("classical pairing needs a linear combination of catalog distributions")

    return split(e, Const(1.0))
