"""Sharp calculus: derivatives, quanta, hypernaturals, fixed points, seminorms.

Sup norms over ``Omega_l = [-l, l]`` use a uniform grid of ``2**12``
points plus a cluster of points at the mollifier scale ``eps_k`` around
the origin, where embedded distributions concentrate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import mpmath
import numpy as np

from . import config
from .algebra import simplify
from .errors import (
    BudgetError,
    ContractionError,
    ConvergenceError,
    DomainError,
    UndecidableError,
    ZeroElementError,
)
from .expr import BinOp, Const, Expr, diff, eval_mp
from .functions import SMOOTH, GeneralizedFunction, _wrap_fn, evaluate
from .gauge import INF, Valuation, fmt_rational
from .idempotent import Idempotent
from .number import GeneralizedNumber, as_number, estimate_valuation, valuation

GRID_POINTS = 2**12
LN2 = math.log(2.0)


# ---------------------------------------------------------------------------
# derivatives


def sharp_derivative(f, axis=0) -> GeneralizedFunction:
    """Symbolic partial derivative along ``axis`` (an index or variable name)."""
    f = _wrap_fn(f)
    var = f.variables[axis] if isinstance(axis, int) else axis
    return f.derivative(var)


def difference_quotient(f, p, r, u=1.0) -> GeneralizedNumber:
    """``(f(p + alpha_r u) - f(p)) alpha_{-r}``."""
    f = _wrap_fn(f)
    r = Fraction(r)
    names = f.variables
    pts = list(p) if isinstance(p, (list, tuple)) else [p]
    dirs = list(u) if isinstance(u, (list, tuple)) else [u] * len(pts)
    if len(pts) != len(names) or len(dirs) != len(names):
        raise DomainError("point and direction must match the function's variables")
    h = GeneralizedNumber.alpha(r)
    moved = [as_number(x) + h * float(d) for x, d in zip(pts, dirs)]
    return (evaluate(f, moved) - evaluate(f, pts)) * GeneralizedNumber.alpha(-r)


def _exact_valuation(x) -> Fraction:
    v = valuation(x)
    if not v.exact or v.bound:
        raise UndecidableError("valuation not exact")
    return v.value


def quanta_eval(x) -> GeneralizedNumber:
    """``g(x) = alpha_{2 V(x)}`` with ``g(0) = 0``."""
    x = as_number(x)
    if not x.exact:
        raise UndecidableError("valuation not exact")
    v = _exact_valuation(x)
    if v == INF:
        return GeneralizedNumber.real(0.0)
    return GeneralizedNumber.alpha(2 * v)


def inversion_map(x) -> GeneralizedNumber:
    """``F(x) = x alpha_{-2 V(x)}``, so that ``||x|| ||F(x)|| = 1``."""
    x = as_number(x)
    if not x.exact:
        raise UndecidableError("valuation not exact")
    v = _exact_valuation(x)
    if v == INF:
        raise ZeroElementError("inversion map is undefined at zero")
    return x * GeneralizedNumber.alpha(-2 * v)


# ---------------------------------------------------------------------------
# sharp neighbourhoods


def in_sharp_ball(x, x0, r, ks=None) -> bool:
    """Membership in ``V_r[x0] = {x : |x - x0| <= alpha_r}``.

    Checked on the regression window of the lattice (the tail that
    stands for the germ).
    """
    cfg = config.current()
    d = as_number(x) - as_number(x0)
    r = Fraction(r)
    if d.exact:
        out = True
        for _, b in d.live_parts:
            v, bound = b.valuation()
            if v > r or (bound and v >= r):
                continue
            if v < r or b.trig:
                return False
            if abs(b.poly.leading[0]) > 1:
                return False
        return out
    ks = range(cfg.window_start, len(d.samples) + 1) if ks is None else ks
    for k in ks:
        s = d.samples[k - 1]
        with mpmath.workdps(int(k * float(r) * 0.302) + 20):
            if abs(mpmath.mpf(s)) > mpmath.mpf(2) ** (-float(r) * k):
                return False
    return True


# ---------------------------------------------------------------------------
# hypernaturals


class IndexFormula:
    def value(self, k: int) -> int:
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class AffineIndex(IndexFormula):
    """``n(k) = max(1, ceil(a k + b))``."""

    a: Fraction
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))
        if self.a < 0:
            raise ValueError("slope must be nonnegative")

    def value(self, k: int) -> int:
        return max(1, math.ceil(self.a * k + self.b))

    def to_json(self) -> dict:
        return {"a": fmt_rational(self.a), "b": fmt_rational(self.b)}


@dataclass(frozen=True)
class ExpIndex(IndexFormula):
    """``n(k) = ceil(2**(s k)) + b``; needed for rates like ``1/n``."""

    s: Fraction
    b: int = 0

    def value(self, k: int) -> int:
        s = Fraction(self.s)
        e = s * k
        if e.denominator == 1:
            base = 2 ** int(e)
        else:
            with mpmath.workdps(int(e) // 3 + 20):
                base = int(mpmath.ceil(mpmath.mpf(2) ** (mpmath.mpf(e.numerator) / e.denominator)))
        return max(1, base + self.b)

    def to_json(self) -> dict:
        return {"kind": "exp", "s": fmt_rational(Fraction(self.s)), "b": fmt_rational(Fraction(self.b))}


@dataclass(frozen=True)
class ContractionIndex(IndexFormula):
    """``n0(k) = 2 floor((t / |ln lam|) k ln 2)``: enough iterations for ``V_t``."""

    lam: float
    t: Fraction

    def value(self, k: int) -> int:
        return 2 * math.floor(float(self.t) / abs(math.log(self.lam)) * k * LN2)

    def slope(self) -> float:
        return 2 * float(self.t) * LN2 / abs(math.log(self.lam))

    def to_json(self) -> dict:
        # smallest rational with denominator <= 1000 bounding the slope from above
        a = Fraction(math.ceil(self.slope() * 1000), 1000)
        return {"a": fmt_rational(a), "b": "0/1"}


@dataclass(frozen=True)
class ShiftedIndex(IndexFormula):
    """``c * base(k) + d``."""

    base: IndexFormula
    c: int = 1
    d: int = 0

    def value(self, k: int) -> int:
        return max(1, self.c * self.base.value(k) + self.d)

    def to_json(self) -> dict:
        return {"kind": "shifted", "base": self.base.to_json(), "c": self.c, "d": self.d}


@dataclass(frozen=True)
class HyperNatural:
    """Interleaving of index formulas over a complete idempotent family."""

    parts: tuple[tuple[Idempotent, IndexFormula], ...]

    @classmethod
    def of(cls, formula: IndexFormula) -> HyperNatural:
        return cls(((Idempotent.one(), formula),))

    @classmethod
    def constant(cls, n: int) -> HyperNatural:
        return cls.of(AffineIndex(0, n))

    def value(self, k: int) -> int:
        for e, f in self.parts:
            if e(k):
                return f.value(k)
        raise ValueError("idempotent family is not complete")

    def __call__(self, k: int) -> int:
        return self.value(k)

    def as_number(self, depth: int | None = None) -> GeneralizedNumber:
        depth = depth or config.current().lattice_depth
        return GeneralizedNumber(samples=[float(self.value(k)) for k in range(1, depth + 1)])

    def to_json(self) -> dict:
        if len(self.parts) == 1:
            return self.parts[0][1].to_json()
        return {"parts": [{"idem": e.to_json(), **f.to_json()} for e, f in self.parts]}


def _frontier(n0: HyperNatural) -> list[HyperNatural]:
    """Hypernaturals at or above ``n0`` used to probe a tail."""
    out = [n0]
    for c, d in ((1, 1), (1, 7), (2, 0), (3, 5)):
        out.append(HyperNatural(tuple((e, ShiftedIndex(f, c, d)) for e, f in n0.parts)))
    alt = Idempotent("", "10")
    out.append(HyperNatural(tuple((e & g, ShiftedIndex(f, c, 0)) for e, f in n0.parts for g, c in ((alt, 1), (~alt, 2)))))
    return out


def _limit_at(limit, k: int):
    if callable(limit):
        return limit(k)
    if isinstance(limit, GeneralizedNumber):
        return limit.sample_at(k, mp=True)
    return mpmath.mpf(limit)


def check_witness(s: Callable[[int, int], object], limit, r, n0: HyperNatural, ks=None) -> bool:
    """All frontier hypernaturals above ``n0`` land in ``V_r`` of the limit.

    Besides the regression window the check probes ``2K`` and ``4K``:
    without them any constant large enough for the finite lattice passes.
    """
    cfg = config.current()
    if ks is None:
        ks = list(range(cfg.window_start, cfg.lattice_depth + 1)) + [2 * cfg.lattice_depth, 4 * cfg.lattice_depth]
    r = float(r)
    for n in _frontier(n0):
        for k in ks:
            with mpmath.workdps(int(r * k * 0.302) + 25):
                diff_k = abs(mpmath.mpf(s(n.value(k), k)) - mpmath.mpf(_limit_at(limit, k)))
                if diff_k > mpmath.mpf(2) ** (-r * k):
                    return False
    return True


def _bisect(make, s, limit, r, lo, hi, steps=12):
    """Smallest passing parameter on a dyadic grid between ``lo`` and ``hi``."""
    if not check_witness(s, limit, r, make(hi)):
        return None
    for _ in range(steps):
        mid = (lo + hi) / 2
        if check_witness(s, limit, r, make(mid)):
            hi = mid
        else:
            lo = mid
    return make(hi)


def hyperseq_limit(s: Callable[[int, int], object], limit, r, max_exponent: int = 10) -> HyperNatural:
    """Find ``n0`` with ``s(n) in V_r[limit]`` for the probed ``n >= n0``.

    ``s(n, k)`` is the ``k``-th representative of the ``n``-th term.  Tries
    constant indices, then affine ``a k``, then exponential ``2**(s k)``.
    """
    r = Fraction(r)
    K = config.current().lattice_depth
    for j in range(0, 21):
        n0 = HyperNatural.constant(2**j)
        if check_witness(s, limit, r, n0):
            if j:
                n0 = _bisect(lambda b: HyperNatural.constant(math.ceil(b)), s, limit, r, 2 ** (j - 1), 2**j) or n0
            # a genuine constant witness survives a longer probe range;
            # one that only fits the finite lattice does not
            if check_witness(s, limit, r, n0, ks=[8 * K, 16 * K]):
                return n0
            break
    a = Fraction(1, 16)
    while a <= 2**max_exponent:
        if check_witness(s, limit, r, HyperNatural.of(AffineIndex(a))):
            found = _bisect(lambda x: HyperNatural.of(AffineIndex(Fraction(x).limit_denominator(4096))), s, limit, r,
                            float(a) / 2, float(a))
            return found
        a *= 2
    e = Fraction(1, 16)
    while e <= max_exponent:
        if check_witness(s, limit, r, HyperNatural.of(ExpIndex(e, 1))):
            found = _bisect(lambda x: HyperNatural.of(ExpIndex(Fraction(x).limit_denominator(4096), 1)), s, limit, r,
                            float(e) / 2, float(e))
            return found
        e *= 2
    raise ConvergenceError("no convergence witness up to the search bound")


# ---------------------------------------------------------------------------
# fixed points


@dataclass
class FixedPointResult:
    value: GeneralizedNumber
    n0: HyperNatural
    gaps: list = field(default_factory=list)
    verdict: str = "CONVERGED"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "profile": [{"k": k, "iterations": n, "log2_gap": g} for k, n, g in self.gaps],
            "witness_n0": self.n0.to_json(),
            "value": [float(v) for v in self.value.samples],
        }


def _as_map(T) -> Callable:
    if isinstance(T, (Expr, str)):
        from .parser import parse

        e = parse(T) if isinstance(T, str) else T
        return lambda k, x: eval_mp(e, {"x": x}, k)
    return T


def _seed_at(seed, k):
    if callable(seed):
        return mpmath.mpf(seed(k))
    if isinstance(seed, GeneralizedNumber):
        return seed.sample_at(k, mp=True)
    return mpmath.mpf(seed)


def fixed_point_solve(T, lam: float, t, seed, depth: int | None = None, budget: int = 10**6,
                      slack: float = 1e-9) -> FixedPointResult:
    """Iterate a per-index contraction ``n0(k)`` times on every lattice index.

    ``T(k, x)`` is the map on index ``k`` (or an expression in ``x`` and
    ``eps``); ``lam`` its contraction constant, asserted by the caller and
    spot-checked on the first iterates.  Arithmetic runs in ``mpmath`` with
    enough digits to resolve ``2**(-k t)``.
    """
    if not 0 < lam < 1:
        raise ContractionError("contraction constant must lie in (0, 1)")
    t = Fraction(t)
    fn = _as_map(T)
    depth = depth or config.current().lattice_depth
    n0 = HyperNatural.of(ContractionIndex(lam, t))
    values = np.empty(depth, dtype=object)
    gaps = []
    for k in range(1, depth + 1):
        n = n0.value(k)
        if n > budget:
            raise BudgetError(f"iteration budget exceeded at k={k}: {n} > {budget}")
        dps = math.ceil(k * float(t) * math.log10(2)) + 15
        with mpmath.workdps(dps):
            x = _seed_at(seed, k)
            x1 = fn(k, x)
            x2 = fn(k, x1)
            tol = mpmath.mpf(10) ** (-(dps - 5))
            if abs(x2 - x1) > lam * abs(x1 - x) * (1 + slack) + tol:
                raise ContractionError(f"map is not a {lam}-contraction near the seed at k={k}")
            for _ in range(n):
                x = fn(k, x)
            gap = abs(fn(k, x) - x)
            gaps.append((k, n, float(mpmath.log(gap, 2)) if gap else -math.inf))
            values[k - 1] = +x
    return FixedPointResult(GeneralizedNumber(samples=values), n0, gaps)


# ---------------------------------------------------------------------------
# seminorms and the down sequencing diagnostic


def _grid(level: float, eps: float, grid: int) -> np.ndarray:
    base = np.linspace(-level, level, grid)
    cluster = eps * np.linspace(-16.0, 16.0, 257)
    return np.concatenate([base, cluster[np.abs(cluster) <= level]])


def sup_samples(f, level: float = 1.0, grid: int = GRID_POINTS, depth: int | None = None, var: str = "x") -> np.ndarray:
    """``sup |f(eps_k, x)|`` over ``Omega_level`` for ``k = 1..depth``."""
    f = _wrap_fn(f)
    depth = depth or config.current().lattice_depth
    out = np.empty(depth)
    for k in range(1, depth + 1):
        xs = _grid(level, 2.0**-k, grid)
        vals = f.sample(xs, [k], var)[0]
        if not np.all(np.isfinite(vals)):
            out[k - 1] = np.inf
        else:
            out[k - 1] = np.max(np.abs(vals))
    return out


@dataclass
class SeminormProfile:
    level: float
    valuations: list[Valuation]

    def __len__(self):
        return len(self.valuations)

    def __getitem__(self, j):
        return self.valuations[j]

    def to_json(self) -> list:
        return [v.to_json() if v.value not in (INF, -INF) else ("inf" if v.value == INF else "-inf") for v in self.valuations]


def seminorm_profile(f, level: float = 1.0, maxorder: int = 1, var: str = "x", grid: int = GRID_POINTS) -> SeminormProfile:
    """Estimated valuations of ``||d^j f||`` on ``Omega_level``, ``j <= maxorder``."""
    f = _wrap_fn(f)
    out = []
    g = f
    for j in range(maxorder + 1):
        sups = sup_samples(g, level, grid, var=var)
        if np.any(np.isinf(sups[config.current().window_start - 1 :])):
            raise DomainError(f"grid overflow in derivative order {j}")
        out.append(Valuation(estimate_valuation(sups) + 0.0, "empirical"))
        g = g.derivative(var)
    return SeminormProfile(level, out)


@dataclass
class DSAReport:
    verdict: str
    profile: SeminormProfile
    offending: int | None = None

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "profile": self.profile.to_json(),
            "offending_order": self.offending,
            "witness_n0": None,
        }


def dsa_check(f, level: float = 1.0, k: int = 1, r=1) -> DSAReport:
    """Does smallness ``v_0 >= 4^k r`` carry over to ``v_j >= r`` for ``j <= k``?

    A diagnostic only: PASS, VACUOUS (hypothesis fails) or VIOLATION.
    Valuation comparisons allow the configured empirical tolerance.
    """
    tol = config.current().valuation_tolerance
    prof = seminorm_profile(f, level, k)
    r = float(r)
    if float(prof[0].value) < 4**k * r - tol:
        return DSAReport("VACUOUS", prof)
    for j in range(1, k + 1):
        if float(prof[j].value) < r - tol:
            return DSAReport("VIOLATION", prof, j)
    return DSAReport("PASS", prof)


def grid_distance(f, g, level: float = 1.0) -> float:
    """Sharp distance ``exp(-v_0(f - g))`` on ``Omega_level``.

    Like terms are cancelled symbolically first so that the sampled sup
    norm does not see round-off from ``f`` itself.
    """
    f, g = _wrap_fn(f), _wrap_fn(g)
    d = simplify(BinOp("-", f.expr, g.expr))
    if isinstance(d, Const) and d.value == 0:
        return 0.0
    tag = f.tag if g.tag == SMOOTH else g.tag
    v = estimate_valuation(sup_samples(GeneralizedFunction(d, tag), level))
    return 0.0 if v == INF else math.exp(-v)
