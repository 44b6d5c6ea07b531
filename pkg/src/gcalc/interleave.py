"""Interleavings, zero divisors, supports and transition measures."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import optimize

from .errors import FamilyError, InvertibleError, NotTameError, SupportError, UndecidableError, ZeroElementError
from .gauge import Branch
from .idempotent import Idempotent, idem_and, idem_canonical, idem_not, idem_or, is_partition
from .number import GeneralizedNumber, _branch_sign, as_number

__all__ = [
    "SupportSet",
    "idem_and",
    "idem_canonical",
    "idem_not",
    "idem_or",
    "interleave_sum",
    "invert_on",
    "invertible_part",
    "restrict",
    "support",
    "support_witnesses",
    "trig_range",
    "transition_measure",
    "zero_divisor_witness",
]


def restrict(e: Idempotent, x) -> GeneralizedNumber:
    """``e * x``: keep ``x`` on the index set of ``e`` and zero elsewhere."""
    return GeneralizedNumber.from_idempotent(e) * as_number(x)


def _exact_zero_set(x: GeneralizedNumber) -> Idempotent:
    out = Idempotent.zero()
    for e, b in x.parts:
        if b.is_zero:
            out = out | e
    return out


def _branch_invertible(b: Branch) -> bool | None:
    """True/False when decidable, None for oscillatory or truncated zero parts."""
    if b.is_zero:
        return False
    if b.poly.is_zero and not b.trig:
        return None
    if b.oscillation_dominates() and _branch_sign(b) is None:
        return None
    return True


def zero_divisor_witness(x) -> Idempotent:
    """A nontrivial ``e`` with ``e * x = 0``; all-1 for ``x = 0``."""
    x = as_number(x)
    if not x.exact:
        raise NotTameError("zero-divisor witness needs an exact-tier element")
    verdicts = [_branch_invertible(b) for e, b in x.live_parts]
    if all(v is True for v in verdicts):
        raise InvertibleError("element is invertible; it has no zero-divisor witness")
    w = _exact_zero_set(x)
    if w.germ_zero:
        raise NotTameError("non-invertibility is not witnessed by a zero branch (not representable-tame)")
    return w


def invertible_part(x) -> Idempotent:
    """Union of the index sets on which ``x`` is invertible."""
    x = as_number(x)
    if not x.exact:
        raise NotTameError("invertible part needs an exact-tier element")
    if all(b.is_zero for _, b in x.live_parts):
        raise ZeroElementError("zero element has no invertible part")
    out = Idempotent.zero()
    for e, b in x.parts:
        v = _branch_invertible(b)
        if v is None and not e.germ_zero:
            raise UndecidableError("undecidable in exact tier: oscillatory or truncated branch")
        if v:
            out = out | e
    return out


def invert_on(e: Idempotent, x) -> GeneralizedNumber:
    """Inverse of ``e * x`` inside the ring ``e * R``, extended by zero."""
    x = as_number(x)
    parts = []
    for f, b in x.parts:
        g = f & e
        if not g.is_empty:
            if g.germ_zero and not _branch_invertible(b):
                parts.append((g, Branch()))
            else:
                if not _branch_invertible(b):
                    raise ZeroElementError("element vanishes on part of the requested index set")
                parts.append((g, b.invert()))
    if not (~e).is_empty:
        parts.append((~e, Branch()))
    return GeneralizedNumber(parts)


def interleave_sum(x, y) -> GeneralizedNumber:
    """Sum over the common refinement of both partitions."""
    return as_number(x) + as_number(y)


def transition_measure(es) -> list[Fraction]:
    """Period density of each idempotent of a complete orthogonal family."""
    es = list(es)
    if not is_partition(es):
        raise FamilyError("transition measure needs a complete orthogonal family")
    return [e.density for e in es]


# ---------------------------------------------------------------------------
# supports


@dataclass(frozen=True)
class SupportSet:
    points: tuple[float, ...] = ()
    intervals: tuple[tuple[float, float], ...] = ()
    empirical: bool = False

    def __post_init__(self):
        ivs = sorted((min(a, b), max(a, b)) for a, b in self.intervals)
        merged: list[tuple[float, float]] = []
        for a, b in ivs:
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        pts = sorted({float(p) for p in self.points if not any(a <= p <= b for a, b in merged)})
        object.__setattr__(self, "points", tuple(pts))
        object.__setattr__(self, "intervals", tuple(merged))

    @property
    def empty(self) -> bool:
        return not self.points and not self.intervals

    def __contains__(self, q) -> bool:
        return q in self.points or any(a <= q <= b for a, b in self.intervals)

    def issubset(self, other: SupportSet, tol: float = 0.0) -> bool:
        def inside(a, b):
            return any(c - tol <= a and b <= d + tol for c, d in other.intervals) or (
                a == b and any(abs(a - p) <= tol for p in other.points)
            )

        return all(inside(p, p) for p in self.points) and all(inside(a, b) for a, b in self.intervals)

    def union(self, other: SupportSet) -> SupportSet:
        return SupportSet(self.points + other.points, self.intervals + other.intervals, self.empirical or other.empirical)

    def to_json(self) -> dict:
        return {
            "points": list(self.points),
            "intervals": [list(iv) for iv in self.intervals],
            "empty": self.empty,
            "tier": "empirical" if self.empirical else "exact",
        }


def _branch_support(b: Branch) -> SupportSet:
    v, _ = b.valuation()
    if v < 0:
        return SupportSet()
    if v > 0:
        return SupportSet(points=(0.0,))
    if b.poly.order <= 0:
        raise UndecidableError("constant term of branch is unknown")
    c = b.poly.coefficient(0)
    live = [t for t in b.trig if t.amplitude.low <= 0]
    if not live:
        return SupportSet(points=(c,))
    if any(t.amplitude.order <= 0 for t in live):
        raise UndecidableError("oscillation amplitude is unknown")
    if len(live) > 1:
        raise SupportError("support not computable in exact tier: several frequencies")
    a = abs(live[0].amplitude.coefficient(0))
    return SupportSet(intervals=((c - a, c + a),))


def trig_range(b: Branch) -> tuple[float, float]:
    """Range of the valuation-0 part of ``b`` over a full phase circle.

    Assumes the phases ``2**(k r)`` are equidistributed modulo ``2 pi``.
    """
    c = b.poly.coefficient(0)
    live = [(t.kind, t.multiplier, t.amplitude.coefficient(0)) for t in b.trig if t.amplitude.low <= 0]

    def f(theta):
        total = c + 0 * theta
        for kind, m, a in live:
            total = total + a * (np.sin(m * theta) if kind == "sin" else np.cos(m * theta))
        return total

    grid = np.linspace(0.0, 2 * np.pi, 8193)
    vals = f(grid)
    step = grid[1] - grid[0]
    lo = min(_refine(f, grid[np.argmin(vals)], step, 1.0), float(vals.min()))
    hi = max(_refine(f, grid[np.argmax(vals)], step, -1.0), float(vals.max()))
    return lo, hi


def _refine(f, theta, step, sign):
    res = optimize.minimize_scalar(lambda t: sign * f(t), bounds=(theta - step, theta + step), method="bounded",
                                   options={"xatol": 1e-12})
    return float(f(res.x))


def support(x, fallback: bool = False) -> SupportSet:
    """Cluster values of ``x`` along the lattice, branch by branch.

    With ``fallback=True`` multi-frequency branches are replaced by the hull
    of their tail samples and the result is flagged empirical.
    """
    x = as_number(x)
    if not x.exact:
        return _sampled_support(x.samples)
    out = SupportSet()
    for e, b in x.live_parts:
        try:
            out = out.union(_branch_support(b))
        except SupportError:
            if not fallback:
                raise
            lo, hi = trig_range(b)
            out = out.union(SupportSet(intervals=((lo, hi),), empirical=True))
    return out


def _sampled_support(samples) -> SupportSet:
    from . import config

    tail = np.asarray(samples[config.current().window_start - 1 :], dtype=float)
    if np.ptp(tail) < 1e-9 * max(1.0, np.abs(tail).max()):
        return SupportSet(points=(float(tail[-1]),), empirical=True)
    if np.abs(tail[-4:]).max() > 1e6:
        return SupportSet(empirical=True)
    return SupportSet(intervals=((float(tail.min()), float(tail.max())),), empirical=True)


def support_witnesses(x) -> list[tuple[float, Idempotent]]:
    """``(q, e)`` pairs with ``e * x`` associated to ``e * q`` for point supports."""
    x = as_number(x)
    out = []
    for e, b in x.live_parts:
        s = _branch_support(b)
        for q in s.points:
            out.append((q, e))
    return out
