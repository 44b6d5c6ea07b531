"""Generalized numbers: interleavings of branches, plus a sampled tier.

An exact-tier :class:`GeneralizedNumber` is a list of ``(Idempotent,
Branch)`` parts forming a complete orthogonal family on the lattice.  An
empirical-tier number is a sampled net ``x_k`` for ``k = 1..K``; its
samples are floats or, for high-precision work, ``mpmath.mpf`` objects.

Every predicate quantifies over the tail of the lattice, so only the
germ of a net matters.
"""

from __future__ import annotations

import enum
import math
import warnings
from fractions import Fraction
from typing import Iterable

import mpmath
import numpy as np

from . import config
from .errors import (
    EmpiricalFallbackWarning,
    FamilyError,
    NotInvertibleError,
    UndecidableError,
)
from .gauge import INF, Branch, GaugeExpansion, RateMismatch, TrigTerm, Valuation, as_rational
from .idempotent import Idempotent, is_partition


class Order(enum.Enum):
    LE = "LE"
    GE = "GE"
    EQ = "EQ"
    INCOMPARABLE = "INCOMPARABLE"


def lattice(depth: int | None = None) -> np.ndarray:
    depth = depth or config.current().lattice_depth
    return np.arange(1, depth + 1)


# ---------------------------------------------------------------------------
# regression on sampled nets


def _log2abs(values) -> np.ndarray:
    values = np.asarray(values)
    if values.dtype == object:
        out = np.empty(values.shape)
        for i, v in enumerate(values):
            out[i] = float(mpmath.log(abs(v), 2)) if v != 0 else -np.inf
        return out
    with np.errstate(divide="ignore"):
        return np.log2(np.abs(values.astype(float)))


def _upper_hull(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    pts: list[tuple[float, float]] = []
    for p in zip(xs, ys):
        while len(pts) >= 2:
            (x1, y1), (x2, y2) = pts[-2], pts[-1]
            if (x2 - x1) * (p[1] - y1) - (y2 - y1) * (p[0] - x1) >= 0:
                pts.pop()
            else:
                break
        pts.append(p)
    return np.array(pts)


def estimate_valuation(samples, ks=None, start: int | None = None) -> float:
    """Growth exponent of a sampled net over the regression window.

    Fits ``log2|x_k| ~ -v k`` using the edge of the upper convex hull that
    spans the window centroid.  Oscillatory factors only pull samples
    below the amplitude line, so the upper hull tracks the amplitude.
    """
    samples = np.asarray(samples)
    if ks is None:
        ks = np.arange(1, len(samples) + 1)
    ks = np.asarray(ks, dtype=float)
    if start is None:
        cfg = config.current()
        start = int(len(samples) * (1 - cfg.window_fraction))
        start = max(0, min(start, len(samples) - 3))
    ys = _log2abs(samples[start:])
    xs = ks[start:]
    finite = np.isfinite(ys)
    if not finite.any():
        # underflow to exact zero counts as +inf, overflow as -inf
        return -INF if np.any(ys == np.inf) else INF
    if finite.sum() == 1:
        i = int(np.flatnonzero(finite)[0])
        return float(-ys[i] / xs[i])
    xs, ys = xs[finite], ys[finite]
    hull = _upper_hull(xs, ys)
    centre = xs.mean()
    i = int(np.searchsorted(hull[:, 0], centre))
    i = min(max(i, 1), len(hull) - 1)
    slope = (hull[i, 1] - hull[i - 1, 1]) / (hull[i, 0] - hull[i - 1, 0])
    return float(-slope)


# ---------------------------------------------------------------------------


def _to_number(value) -> GeneralizedNumber:
    if isinstance(value, GeneralizedNumber):
        return value
    if isinstance(value, Idempotent):
        return GeneralizedNumber.from_idempotent(value)
    if isinstance(value, (int, float, Fraction, np.floating, np.integer)):
        return GeneralizedNumber.real(float(value))
    return NotImplemented


class GeneralizedNumber:
    """An element of the generalized reals.

    Build exact elements with :meth:`real`, :meth:`alpha`, :meth:`interleave`
    and the arithmetic operators; sampled elements with :meth:`from_samples`.
    """

    __slots__ = ("_parts", "_samples")

    def __init__(self, parts: Iterable[tuple[Idempotent, Branch]] | None = None, samples=None):
        if (parts is None) == (samples is None):
            raise ValueError("give exactly one of parts or samples")
        if samples is not None:
            arr = np.asarray(samples)
            if arr.dtype != object:
                arr = arr.astype(float)
            self._parts = None
            self._samples = arr
            return
        self._samples = None
        self._parts = _canonical(parts)

    # -- constructors ----------------------------------------------------

    @classmethod
    def from_branch(cls, branch: Branch) -> GeneralizedNumber:
        return cls([(Idempotent.one(), branch)])

    @classmethod
    def from_expansion(cls, expansion: GaugeExpansion) -> GeneralizedNumber:
        return cls.from_branch(Branch(expansion))

    @classmethod
    def real(cls, c: float) -> GeneralizedNumber:
        return cls.from_expansion(GaugeExpansion.constant(c) if c else GaugeExpansion())

    @classmethod
    def alpha(cls, r, c: float = 1.0) -> GeneralizedNumber:
        return cls.from_expansion(GaugeExpansion.monomial(c, as_rational(r)))

    @classmethod
    def trig(cls, kind: str, multiplier: int = 1, rate=1, amplitude=None) -> GeneralizedNumber:
        """``amplitude * trig(multiplier * alpha_{-rate})``."""
        amp = amplitude if amplitude is not None else GaugeExpansion.constant(1.0)
        return cls.from_branch(Branch(GaugeExpansion(), (TrigTerm(amp, kind, multiplier, as_rational(rate)),)))

    @classmethod
    def from_idempotent(cls, e: Idempotent) -> GeneralizedNumber:
        return cls.interleave([(e, 1.0), (~e, 0.0)])

    @classmethod
    def interleave(cls, pieces) -> GeneralizedNumber:
        """``sum e_j * x_j`` over a complete orthogonal family ``e_j``."""
        pieces = [(e, _to_number(x)) for e, x in (pieces.items() if isinstance(pieces, dict) else pieces)]
        if not is_partition([e for e, _ in pieces]):
            raise FamilyError("interleaving needs a complete orthogonal idempotent family")
        if any(not x.exact for _, x in pieces):
            depth = max([len(x._samples) for _, x in pieces if not x.exact])
            ks = lattice(depth)
            total = sum(e.mask(ks) * x.sample(depth) for e, x in pieces)
            return cls(samples=total)
        parts = []
        for e, x in pieces:
            for f, b in x.parts:
                g = e & f
                if not g.is_empty:
                    parts.append((g, b))
        return cls(parts)

    @classmethod
    def from_samples(cls, values) -> GeneralizedNumber:
        return cls(samples=values)

    @classmethod
    def from_json(cls, data: dict) -> GeneralizedNumber:
        if "samples" in data:
            return cls(samples=[float(v) for v in data["samples"]])
        if "parts" in data:
            return cls([(Idempotent.from_json(p["idem"]), Branch.from_json(p)) for p in data["parts"]])
        return cls.from_branch(Branch.from_json(data))

    def to_json(self) -> dict:
        if not self.exact:
            return {"samples": [float(v) for v in self._samples], "tier": "empirical"}
        if len(self._parts) == 1 and self._parts[0][0].is_full:
            return self._parts[0][1].to_json()
        return {"parts": [dict(idem=e.to_json(), **b.to_json()) for e, b in self._parts]}

    # -- structure -------------------------------------------------------

    @property
    def exact(self) -> bool:
        return self._parts is not None

    @property
    def parts(self) -> tuple[tuple[Idempotent, Branch], ...]:
        if self._parts is None:
            raise UndecidableError("empirical-tier number has no exact parts")
        return self._parts

    @property
    def live_parts(self):
        """Parts whose idempotent is nonzero as a germ."""
        return tuple((e, b) for e, b in self.parts if not e.germ_zero)

    @property
    def samples(self) -> np.ndarray:
        if self._samples is None:
            raise UndecidableError("exact-tier number has no stored samples")
        return self._samples

    @property
    def is_zero(self) -> bool:
        """Zero as a germ (exact tier: zero up to the known order)."""
        if not self.exact:
            tail = self._samples[config.current().window_start - 1 :]
            return bool(np.all(tail == 0))
        return all(b.poly.is_zero and not b.trig for _, b in self.live_parts)

    @property
    def expansion(self) -> GaugeExpansion:
        """The polynomial part of a single-branch number."""
        live = self.live_parts
        if len(live) != 1 or live[0][1].trig:
            raise ValueError("not a single polynomial branch")
        return live[0][1].poly

    def sample(self, depth: int | None = None) -> np.ndarray:
        """Values ``x_k`` for ``k = 1..depth`` as floats (or mpf for mp samples)."""
        depth = depth or config.current().lattice_depth
        if not self.exact:
            if len(self._samples) < depth:
                raise UndecidableError(f"sampled net has only {len(self._samples)} indices, {depth} requested")
            return self._samples[:depth]
        ks = lattice(depth)
        out = np.zeros(depth)
        for e, b in self._parts:
            m = e.mask(ks)
            if m.any():
                out[m] = b.sample(ks[m])
        return out

    def sample_at(self, k: int, mp: bool = False):
        if not self.exact:
            return self._samples[k - 1]
        for e, b in self._parts:
            if e(k):
                return b.sample_mp(k) if mp else float(b.sample([k])[0])
        return mpmath.mpf(0) if mp else 0.0

    def sample_mp(self, depth: int | None = None) -> np.ndarray:
        depth = depth or config.current().lattice_depth
        if not self.exact:
            return self.sample(depth)
        return np.array([self.sample_at(k, mp=True) for k in range(1, depth + 1)], dtype=object)

    def demote(self, depth: int | None = None) -> GeneralizedNumber:
        return GeneralizedNumber(samples=self.sample(depth))

    # -- arithmetic ------------------------------------------------------

    def _binary(self, other, op_name):
        other = _to_number(other)
        if other is NotImplemented:
            return NotImplemented
        if self.exact and other.exact:
            try:
                parts = []
                for e, a in self._parts:
                    for f, b in other._parts:
                        g = e & f
                        if g.is_empty:
                            continue
                        parts.append((g, a + b if op_name == "add" else a * b))
                return GeneralizedNumber(parts)
            except RateMismatch:
                warnings.warn(
                    "oscillatory parts with different base rates; result demoted to the empirical tier",
                    EmpiricalFallbackWarning,
                    stacklevel=3,
                )
        depth = _common_depth(self, other)
        a = self._sample_like(other, depth)
        b = other._sample_like(self, depth)
        with mpmath.workprec(_mp_prec(a, b)):
            return GeneralizedNumber(samples=a + b if op_name == "add" else a * b)

    def _sample_like(self, other, depth):
        mp = (not other.exact and other._samples.dtype == object) or (not self.exact and self._samples.dtype == object)
        return self.sample_mp(depth) if mp else self.sample(depth)

    def __add__(self, other):
        return self._binary(other, "add")

    __radd__ = __add__

    def __mul__(self, other):
        return self._binary(other, "mul")

    __rmul__ = __mul__

    def __neg__(self):
        if not self.exact:
            with mpmath.workprec(_mp_prec(self._samples)):
                return GeneralizedNumber(samples=-self._samples)
        return GeneralizedNumber([(e, -b) for e, b in self._parts])

    def __sub__(self, other):
        other = _to_number(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __truediv__(self, other):
        other = _to_number(other)
        if other is NotImplemented:
            return NotImplemented
        return self * invert(other)

    def __rtruediv__(self, other):
        return _to_number(other) * invert(self)

    def __pow__(self, n):
        if isinstance(n, Fraction) and n.denominator != 1:
            return fractional_power(self, n)
        n = int(n)
        if n < 0:
            return invert(self) ** (-n)
        result = GeneralizedNumber.real(1.0)
        for _ in range(n):
            result = result * self
        return result

    def scale_parts(self, fn) -> GeneralizedNumber:
        """Apply ``fn`` to every branch (exact tier)."""
        return GeneralizedNumber([(e, fn(b)) for e, b in self.parts])

    def __eq__(self, other):
        other = _to_number(other)
        if other is NotImplemented:
            return NotImplemented
        return compare(self, other) is Order.EQ

    __hash__ = None

    def __repr__(self) -> str:
        if not self.exact:
            return f"GeneralizedNumber(samples[{len(self._samples)}])"
        if len(self._parts) == 1 and self._parts[0][0].is_full:
            return f"GeneralizedNumber({self._parts[0][1]!r})"
        return f"GeneralizedNumber({list(self._parts)!r})"


def _mp_prec(*arrays) -> int:
    """Bits needed to combine mpf samples without rounding them to the
    ambient precision."""
    prec = mpmath.mp.prec
    for arr in arrays:
        if isinstance(arr, np.ndarray) and arr.dtype == object:
            for v in arr:
                if isinstance(v, mpmath.mpf):
                    prec = max(prec, v._mpf_[3])
    return prec


def _common_depth(x: GeneralizedNumber, y: GeneralizedNumber) -> int:
    lengths = [len(z._samples) for z in (x, y) if not z.exact]
    return min(lengths) if lengths else config.current().lattice_depth


def _canonical(parts) -> tuple[tuple[Idempotent, Branch], ...]:
    merged: list[tuple[Idempotent, Branch]] = []
    for e, b in parts:
        if e.is_empty:
            continue
        for i, (f, c) in enumerate(merged):
            if c == b:
                merged[i] = (f | e, c)
                break
        else:
            merged.append((e, b))
    merged.sort(key=lambda p: (p[0].pre, p[0].per))
    if not merged:
        return ((Idempotent.one(), Branch()),)
    return tuple(merged)


def as_number(value) -> GeneralizedNumber:
    out = _to_number(value)
    if out is NotImplemented:
        raise TypeError(f"cannot interpret {value!r} as a generalized number")
    return out


# ---------------------------------------------------------------------------
# public operations


def make_alpha(r) -> GeneralizedNumber:
    return GeneralizedNumber.alpha(r)


def add(x, y) -> GeneralizedNumber:
    return as_number(x) + as_number(y)


def mul(x, y) -> GeneralizedNumber:
    return as_number(x) * as_number(y)


def valuation(x) -> Valuation:
    """Exact tier: minimum leading exponent over live branches."""
    x = as_number(x)
    if not x.exact:
        return Valuation(estimate_valuation(x.samples), tier="empirical")
    value, bound = INF, False
    for _, b in x.live_parts:
        v, bd = b.valuation()
        if v < value:
            value, bound = v, bd
        elif v == value:
            bound = bound and bd
    return Valuation(value, "exact", bound)


def norm(x) -> float:
    return valuation(x).norm


def _branch_sign(b: Branch) -> int | None:
    """Eventual sign of a branch: +1, -1, 0, or None if it oscillates."""
    if b.poly.is_zero and not b.trig:
        return 0
    if not b.trig:
        return 1 if b.poly.leading[0] > 0 else -1
    lead = b.poly.low
    osc = min(t.amplitude.low for t in b.trig)
    if b.poly.leading is not None and lead < osc:
        return 1 if b.poly.leading[0] > 0 else -1
    if b.poly.leading is not None and lead == osc:
        c = b.poly.leading[0]
        amp = sum(abs(t.amplitude.coefficient(lead)) for t in b.trig)
        if abs(c) > amp:
            return 1 if c > 0 else -1
    return None


def compare(x, y) -> Order:
    """Eventual pointwise order of ``x`` and ``y``."""
    d = as_number(x) - as_number(y)
    if not d.exact:
        tail = np.asarray(d.samples[config.current().window_start - 1 :])
        if np.all(tail == 0):
            return Order.EQ
        if np.all(tail >= 0):
            return Order.GE
        if np.all(tail <= 0):
            return Order.LE
        return Order.INCOMPARABLE
    signs = {_branch_sign(b) for _, b in d.live_parts}
    if None in signs:
        return Order.INCOMPARABLE
    signs.discard(0)
    if not signs:
        return Order.EQ
    if signs == {1}:
        return Order.GE
    if signs == {-1}:
        return Order.LE
    return Order.INCOMPARABLE


def _branch_invertible(b: Branch) -> bool:
    if b.poly.is_zero and not b.trig:
        if not b.poly.is_exact:
            raise UndecidableError(f"branch known only up to O(eps^{b.poly.order})")
        return False
    if b.oscillation_dominates() and _branch_sign(b) is None:
        raise UndecidableError("undecidable in exact tier: oscillatory leading part")
    return True


def is_invertible(x) -> bool:
    """``|x| >= alpha_r`` for some ``r``, decided branch by branch."""
    x = as_number(x)
    if not x.exact:
        tail = np.asarray(x.samples[config.current().window_start - 1 :])
        return bool(np.all(tail != 0))
    return all(_branch_invertible(b) for _, b in x.live_parts)


def invert(x) -> GeneralizedNumber:
    x = as_number(x)
    if not x.exact:
        s = x.samples
        if np.any(s[config.current().window_start - 1 :] == 0):
            raise NotInvertibleError("sampled net vanishes on the tail")
        with np.errstate(divide="ignore"), mpmath.workprec(_mp_prec(s)):
            return GeneralizedNumber(samples=1 / s)
    if not is_invertible(x):
        from .interleave import zero_divisor_witness

        raise NotInvertibleError("element is a zero divisor", witness=zero_divisor_witness(x))
    return GeneralizedNumber([(e, b.invert() if not e.germ_zero else b) for e, b in x.parts])


def fractional_power(x, p) -> GeneralizedNumber:
    x = as_number(x)
    p = as_rational(p)
    if not x.exact:
        return GeneralizedNumber(samples=np.sign(x.samples) * np.abs(x.samples) ** float(p))

    def one(b: Branch) -> Branch:
        if b.trig:
            raise UndecidableError("fractional power of an oscillatory branch")
        if b.poly.is_zero and p > 0:
            return b
        return Branch(b.poly.fractional_power(p))

    return x.scale_parts(one)


def is_infinitesimal(x) -> bool:
    v = valuation(x)
    return v.value > (config.current().valuation_tolerance if not v.exact else 0)


def is_infinite(x) -> bool:
    x = as_number(x)
    if not x.exact:
        return valuation(x).value < -config.current().valuation_tolerance
    return any(b.valuation()[0] < 0 for _, b in x.live_parts)


def associated(x, y) -> bool:
    return is_infinitesimal(as_number(x) - as_number(y))


def shadow(x) -> float | None:
    """The classical limit, when every live branch converges to the same real."""
    x = as_number(x)
    if not x.exact:
        return _empirical_shadow(x.samples)
    value = None
    for _, b in x.live_parts:
        v, _bound = b.valuation()
        if v < 0:
            return None
        if any(t.amplitude.low <= 0 for t in b.trig):
            return None
        if b.poly.order <= 0:
            return None
        c = b.poly.coefficient(0)
        if value is None:
            value = c
        elif c != value:
            return None
    return 0.0 if value is None else value


def _empirical_shadow(samples) -> float | None:
    s = np.asarray(samples)
    start = config.current().window_start - 1
    tail = s[start:]
    last = tail[-1]
    diffs = np.diff(tail)
    if np.all(diffs == 0):
        return float(last)
    v = estimate_valuation(np.concatenate([[0] * (start + 1), diffs]))
    if v > config.current().valuation_tolerance:
        # geometric tail correction for a net converging like 2**(-v k)
        q = 2.0 ** (-v)
        return float(last + diffs[-1] * q / (1 - q))
    return None
