"""Membranes, strong internal sets and essential supports.

A region net is a box or ball in R^n whose parameters are generalized
numbers (often plain reals or expressions in ``eps``).  Membership of a
point in the strong internal set it generates is decided by the
invertibility of the distance to the complement, which for boxes and
balls has a closed form that can be computed branch by branch.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np

from . import config
from .errors import DomainError, EmpiricalFallbackWarning, ModerateError, SupportError, UndecidableError
from .expr import Expr, eval_mp
from .gauge import Branch, RateMismatch
from .interleave import SupportSet, _branch_support, _sampled_support, trig_range
from .number import GeneralizedNumber, _branch_sign, as_number, fractional_power, is_invertible


class Unbounded:
    """A side at +-infinity, or a non-moderate parameter such as ``exp(alpha(-1))``.

    Either way it dominates every moderate point, so it never contributes
    to the distance to the complement.
    """

    def __init__(self, sign: int = 1):
        self.sign = 1 if sign > 0 else -1

    def __repr__(self):
        return "inf" if self.sign > 0 else "-inf"

    def __eq__(self, other):
        return isinstance(other, Unbounded) and other.sign == self.sign

    def __hash__(self):
        return hash(("Unbounded", self.sign))


def _param(v):
    if isinstance(v, Unbounded):
        return v
    if isinstance(v, (int, float)) and math.isinf(v):
        return Unbounded(1 if v > 0 else -1)
    if isinstance(v, str):
        from .parser import parse

        v = parse(v)
    if isinstance(v, Expr):
        from .series import evaluate_expr

        try:
            return evaluate_expr(v, {}, tier="auto")
        except ModerateError:
            k = config.current().lattice_depth
            with mpmath.workdps(30):
                s = eval_mp(v, {}, k)
            return Unbounded(1 if s > 0 else -1)
    return as_number(v)


def _text(v) -> str:
    if isinstance(v, Unbounded):
        return repr(v)
    n = as_number(v)
    if n.exact and len(n.parts) == 1 and n.parts[0][1].is_polynomial and n.parts[0][1].poly.is_exact:
        # in the expression language, so region literals round-trip
        terms = []
        for c, e in n.parts[0][1].poly.terms:
            terms.append(f"{c:.17g}" if e == 0 else f"{c:.17g}*alpha({e})")
        return " + ".join(terms).replace("+ -", "- ") or "0"
    return repr(n)


# ---------------------------------------------------------------------------
# branch helpers


def _refine(nums) -> list[tuple[object, list[Branch]]]:
    """Common refinement of the idempotent families of exact numbers."""
    out = [(None, [])]
    for x in nums:
        nxt = []
        for e, bs in out:
            for f, b in x.parts:
                g = f if e is None else e & f
                if not g.is_empty:
                    nxt.append((g, bs + [b]))
        out = nxt
    return [(e, bs) for e, bs in out if not e.germ_zero]


class _Undecided(Exception):
    pass


def _sign(b: Branch) -> int:
    s = _branch_sign(b)
    if s is None:
        raise _Undecided("oscillatory comparison")
    return s


def _bmin(a: Branch, b: Branch) -> Branch:
    try:
        return b if _sign(a - b) > 0 else a
    except RateMismatch as exc:
        raise _Undecided(str(exc)) from exc


def _bmax(a: Branch, b: Branch) -> Branch:
    try:
        return a if _sign(a - b) > 0 else b
    except RateMismatch as exc:
        raise _Undecided(str(exc)) from exc


def _branchwise(fn, nums) -> GeneralizedNumber:
    return GeneralizedNumber([(e, fn(*bs)) for e, bs in _refine(nums)])


def gn_min(*nums) -> GeneralizedNumber:
    """Pointwise minimum of exact numbers; raises on undecidable branches."""
    nums = [as_number(x) for x in nums]
    out = nums[0]
    for y in nums[1:]:
        out = _branchwise(_bmin, [out, y])
    return out


def gn_max(*nums) -> GeneralizedNumber:
    nums = [as_number(x) for x in nums]
    out = nums[0]
    for y in nums[1:]:
        out = _branchwise(_bmax, [out, y])
    return out


def _positive_part(x: GeneralizedNumber) -> GeneralizedNumber:
    return x.scale_parts(lambda b: b if _sign(b) > 0 else Branch())


# ---------------------------------------------------------------------------
# regions


@dataclass(frozen=True, eq=False)
class Region:
    """Open box ``prod (lo_i, hi_i)`` or open ball ``B(center, radius)``.

    ``a`` holds the lower corner or the center, ``b`` the upper corner or
    ``(radius,)``.  Parameters may be reals, ``inf``, generalized numbers
    or expressions in ``eps``.
    """

    kind: str
    a: tuple
    b: tuple

    def __post_init__(self):
        if self.kind not in ("box", "ball"):
            raise ValueError(f"unknown region kind {self.kind!r}")
        a = tuple(_param(v) for v in self.a)
        b = tuple(_param(v) for v in self.b)
        if self.kind == "box" and len(a) != len(b):
            raise ValueError("box needs as many upper as lower bounds")
        if self.kind == "ball":
            if len(b) != 1:
                raise ValueError("ball takes a single radius")
            if any(isinstance(c, Unbounded) for c in a):
                raise ValueError("ball center must be finite")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def box(cls, lo, hi) -> Region:
        lo = lo if isinstance(lo, (list, tuple)) else (lo,)
        hi = hi if isinstance(hi, (list, tuple)) else (hi,)
        return cls("box", tuple(lo), tuple(hi))

    @classmethod
    def ball(cls, center, radius) -> Region:
        center = center if isinstance(center, (list, tuple)) else (center,)
        return cls("ball", tuple(center), (radius,))

    @property
    def dim(self) -> int:
        return len(self.a)

    def distance(self, p) -> GeneralizedNumber:
        return distance_to_complement(p, self)

    def to_json(self) -> dict:
        if self.kind == "box":
            return {"kind": "box", "lo": [_text(v) for v in self.a], "hi": [_text(v) for v in self.b]}
        return {"kind": "ball", "center": [_text(v) for v in self.a], "radius": _text(self.b[0])}

    def __str__(self) -> str:
        return f"{self.kind}({', '.join(_text(v) for v in self.a + self.b)})"


SetNet = Region


@dataclass(frozen=True)
class IntersectionSet:
    """Intersection known only through membership (no region formula)."""

    members: tuple

    @property
    def dim(self) -> int:
        return self.members[0].dim

    def distance(self, p) -> GeneralizedNumber:
        # the complement of an intersection is the union of complements
        return _min_dist([distance_to_complement(p, m) for m in self.members])

    def to_json(self) -> dict:
        return {"kind": "intersection", "membership_level": True, "members": [m.to_json() for m in self.members]}

    def __str__(self) -> str:
        return " & ".join(str(m) for m in self.members)


def _coords(p, dim: int) -> list[GeneralizedNumber]:
    pts = list(p) if isinstance(p, (list, tuple)) else [p]
    if len(pts) != dim:
        raise DomainError(f"point has {len(pts)} coordinates, region has dimension {dim}")
    return [as_number(x) for x in pts]


def _min_dist(ds) -> GeneralizedNumber:
    if any(not d.exact for d in ds):
        depth = config.current().lattice_depth
        cols = [d.sample_mp(depth) for d in ds]
        return GeneralizedNumber(samples=np.array([min(c[i] for c in cols) for i in range(depth)], dtype=object))
    return gn_min(*ds)


def _exact_distance(xs, region: Region) -> GeneralizedNumber:
    if region.kind == "box":
        terms = []
        for x, lo, hi in zip(xs, region.a, region.b):
            if not isinstance(lo, Unbounded):
                terms.append(x - lo)
            elif lo.sign > 0:
                return GeneralizedNumber.real(0.0)
            if not isinstance(hi, Unbounded):
                terms.append(hi - x)
            elif hi.sign < 0:
                return GeneralizedNumber.real(0.0)
        if not terms:
            # whole space: any positive constant has the same invertibility
            return GeneralizedNumber.real(1.0)
        return _positive_part(gn_min(*terms))
    r = region.b[0]
    if isinstance(r, Unbounded):
        return GeneralizedNumber.real(1.0 if r.sign > 0 else 0.0)
    sq = GeneralizedNumber.real(0.0)
    for x, c in zip(xs, region.a):
        sq = sq + (x - c) * (x - c)
    try:
        length = fractional_power(sq, Fraction(1, 2))
    except (UndecidableError, ValueError) as exc:
        raise _Undecided(str(exc)) from exc
    return _positive_part(r - length)


def _sampled_distance(xs, region: Region) -> GeneralizedNumber:
    depth = config.current().lattice_depth
    out = np.empty(depth, dtype=object)
    cols = [x.sample_mp(depth) for x in xs]

    def at(v, k):
        if isinstance(v, Unbounded):
            return mpmath.inf * v.sign
        return as_number(v).sample_at(k, mp=True)

    for k in range(1, depth + 1):
        pt = [c[k - 1] for c in cols]
        if region.kind == "box":
            d = min(min(x - at(lo, k), at(hi, k) - x) for x, lo, hi in zip(pt, region.a, region.b))
        else:
            d = at(region.b[0], k) - mpmath.sqrt(sum((x - at(c, k)) ** 2 for x, c in zip(pt, region.a)))
        d = max(mpmath.mpf(0), d)
        out[k - 1] = mpmath.mpf(1) if mpmath.isinf(d) else d
    return GeneralizedNumber(samples=out)


def distance_to_complement(p, region) -> GeneralizedNumber:
    """``d(p, A^c)`` computed branch by branch, sampled when undecidable."""
    if isinstance(region, IntersectionSet):
        return region.distance(p)
    xs = _coords(p, region.dim)
    params = [v for v in region.a + region.b if not isinstance(v, Unbounded)]
    if all(x.exact for x in xs) and all(v.exact for v in params):
        try:
            return _exact_distance(xs, region)
        except _Undecided as exc:
            warnings.warn(f"distance not exactly representable ({exc}); sampling the lattice",
                          EmpiricalFallbackWarning, stacklevel=2)
    return _sampled_distance(xs, region)


def strong_member(p, A) -> bool:
    """``p`` lies in the strong internal set generated by ``A``."""
    return is_invertible(distance_to_complement(p, A))


def membership_report(p, A) -> dict:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        d = distance_to_complement(p, A)
    member = is_invertible(d)
    return {
        "member": bool(member),
        "tier": "exact" if d.exact else "empirical",
        "distance": d.to_json(),
        "warnings": [str(w.message) for w in caught],
    }


def intersect_strong(A, B):
    """Intersection of strong internal sets: a box for two boxes when the
    corners compare branch by branch, a membership-level set otherwise."""
    if A.dim != B.dim:
        raise DomainError("regions have different dimensions")
    if isinstance(A, Region) and isinstance(B, Region) and A.kind == B.kind == "box":
        try:
            lo = tuple(_side_max(a, b) for a, b in zip(A.a, B.a))
            hi = tuple(_side_min(a, b) for a, b in zip(A.b, B.b))
            return Region("box", lo, hi)
        except _Undecided:
            pass
    members = []
    for X in (A, B):
        members.extend(X.members if isinstance(X, IntersectionSet) else (X,))
    return IntersectionSet(tuple(members))


def _side_max(a, b):
    if isinstance(a, Unbounded):
        return b if a.sign < 0 else a
    if isinstance(b, Unbounded):
        return a if b.sign < 0 else b
    if not (a.exact and b.exact):
        raise _Undecided("sampled corner")
    return gn_max(a, b)


def _side_min(a, b):
    if isinstance(a, Unbounded):
        return b if a.sign > 0 else a
    if isinstance(b, Unbounded):
        return a if b.sign > 0 else b
    if not (a.exact and b.exact):
        raise _Undecided("sampled corner")
    return gn_min(a, b)


# ---------------------------------------------------------------------------
# membranes


def _real_param(v) -> float:
    if isinstance(v, Unbounded):
        return math.inf * v.sign
    n = as_number(v)
    if not n.exact or len(n.parts) != 1 or n.parts[0][1].trig or n.parts[0][1].poly.low < 0:
        raise DomainError("membrane base must be a classical region")
    return n.parts[0][1].poly.coefficient(0)


@dataclass(frozen=True, eq=False)
class Membrane:
    """Compactly supported points of a classical open region (or union)."""

    base: object
    L: float | None = None

    def __post_init__(self):
        regions = self.base if isinstance(self.base, (list, tuple)) else (self.base,)
        regions = tuple(r if isinstance(r, Region) else Region(*r) for r in regions)
        if len({r.dim for r in regions}) != 1:
            raise DomainError("membrane regions have different dimensions")
        object.__setattr__(self, "base", regions)
        if self.L is None:
            object.__setattr__(self, "L", max(_circumradius(r) for r in regions) + 1.0)
        if not math.isfinite(self.L):
            raise DomainError("unbounded membrane base needs an explicit compact-support bound L")

    @property
    def dim(self) -> int:
        return self.base[0].dim


def _circumradius(r: Region) -> float:
    """``sup |y|`` over the region."""
    if r.kind == "box":
        return math.sqrt(sum(max(abs(_real_param(lo)), abs(_real_param(hi))) ** 2 for lo, hi in zip(r.a, r.b)))
    c = [_real_param(v) for v in r.a]
    return math.sqrt(sum(x * x for x in c)) + _real_param(r.b[0])


def _branch_inside(bs: list[Branch], r: Region) -> bool:
    if r.kind == "box":
        for b, lo, hi in zip(bs, r.a, r.b):
            lo, hi = _real_param(lo), _real_param(hi)
            if math.isfinite(lo) and _sign(b - Branch.constant(lo)) <= 0:
                return False
            if math.isfinite(hi) and _sign(Branch.constant(hi) - b) <= 0:
                return False
        return True
    rad = _real_param(r.b[0])
    if math.isinf(rad):
        return True
    acc = Branch.constant(rad * rad)
    for b, c in zip(bs, r.a):
        d = b - Branch.constant(_real_param(c))
        acc = acc - d * d
    return _sign(acc) > 0


def membrane_member(p, m: Membrane) -> bool:
    """Every branch of ``p`` eventually lies in the base region and
    stays within the compact-support bound ``L``."""
    m = m if isinstance(m, Membrane) else Membrane(m)
    xs = _coords(p, m.dim)
    if not all(x.exact for x in xs):
        raise UndecidableError("tail behavior undecidable")
    try:
        for _, bs in _refine(xs):
            sq = Branch.constant(m.L * m.L)
            for b in bs:
                sq = sq - b * b
            if _sign(sq) < 0:
                return False
            if not any(_branch_inside(bs, r) for r in m.base):
                return False
    except (_Undecided, RateMismatch) as exc:
        raise UndecidableError(f"tail behavior undecidable: {exc}") from exc
    return True


# ---------------------------------------------------------------------------
# essential support


def essential_support(p) -> SupportSet:
    """Closure of the cluster set of the tail, branch by branch.

    Branches with several oscillation frequencies use the numerically
    computed range of their phase polynomial (flagged empirical).
    """
    x = as_number(p)
    if not x.exact:
        return _sampled_support(x.samples)
    out = SupportSet()
    for _, b in x.live_parts:
        try:
            out = out.union(_branch_support(b))
        except SupportError:
            lo, hi = trig_range(b)
            out = out.union(SupportSet(intervals=((lo, hi),), empirical=True))
    return out

