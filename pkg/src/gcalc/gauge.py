"""Gauge expansions: finite power series in the gauge with rational exponents.

A :class:`GaugeExpansion` stands for the net ``k -> sum c * 2**(-k*e)``
together with an ``order``: every exponent at or above ``order`` is
unknown (Puiseux-style precision tracking).  ``order = inf`` means the
expansion is exact.

:class:`TrigTerm` and :class:`Branch` extend expansions with oscillatory
factors ``trig(m * 2**(k*r))`` that share one base rate ``r``.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

import mpmath
import numpy as np

from . import config

INF = math.inf
CANCEL_RTOL = 1e-12


def as_rational(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    return Fraction(value)


def fmt_rational(value) -> str:
    if value == INF:
        return "inf"
    value = Fraction(value)
    return f"{value.numerator}/{value.denominator}"


def parse_rational(text: str):
    if text == "inf":
        return INF
    return Fraction(text)


def _accumulate(pairs: Iterable[tuple[Fraction, float]]) -> dict[Fraction, float]:
    """Sum coefficients per exponent; near-total cancellation becomes zero."""
    bucket: dict[Fraction, list[float]] = defaultdict(list)
    for e, c in pairs:
        bucket[e].append(c)
    out = {}
    for e, cs in bucket.items():
        total = math.fsum(cs)
        scale = max(abs(c) for c in cs)
        if total != 0.0 and abs(total) > CANCEL_RTOL * scale:
            out[e] = total
    return out


@dataclass(frozen=True)
class GaugeExpansion:
    terms: tuple[tuple[float, Fraction], ...] = ()
    order: Fraction | float = INF

    def __post_init__(self):
        order = self.order if self.order == INF else as_rational(self.order)
        merged = _accumulate((as_rational(e), float(c)) for c, e in self.terms)
        kept = sorted((e, c) for e, c in merged.items() if e < order)
        cap = config.current().term_cap
        if len(kept) > cap:
            order = kept[cap][0]
            kept = kept[:cap]
        object.__setattr__(self, "terms", tuple((c, e) for e, c in kept))
        object.__setattr__(self, "order", order)

    # -- constructors ----------------------------------------------------

    @classmethod
    def constant(cls, c: float) -> GaugeExpansion:
        return cls(((float(c), Fraction(0)),))

    @classmethod
    def monomial(cls, c: float, e) -> GaugeExpansion:
        return cls(((float(c), as_rational(e)),))

    @classmethod
    def zero(cls) -> GaugeExpansion:
        return cls()

    @classmethod
    def from_json(cls, data: dict) -> GaugeExpansion:
        terms = tuple((float(t["c"]), Fraction(t["e"])) for t in data.get("terms", ()))
        return cls(terms, parse_rational(data.get("order", "inf")))

    def to_json(self) -> dict:
        return {
            "terms": [{"c": c, "e": fmt_rational(e)} for c, e in self.terms],
            "order": fmt_rational(self.order),
        }

    # -- structure -------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        """No known terms.  With a finite order this means ``O(eps**order)``."""
        return not self.terms

    @property
    def is_exact(self) -> bool:
        return self.order == INF

    @property
    def leading(self) -> tuple[float, Fraction] | None:
        return self.terms[0] if self.terms else None

    @property
    def low(self):
        """Leading exponent, or the order when no term is known."""
        return self.terms[0][1] if self.terms else self.order

    def coefficient(self, e) -> float:
        e = as_rational(e)
        for c, ee in self.terms:
            if ee == e:
                return c
        return 0.0

    def truncate(self, order) -> GaugeExpansion:
        order = min(self.order, order)
        return GaugeExpansion(tuple((c, e) for c, e in self.terms if e < order), order)

    def split(self, at) -> tuple[GaugeExpansion, GaugeExpansion]:
        """Terms with exponent below ``at`` and the rest (which keeps the order)."""
        below = GaugeExpansion(tuple((c, e) for c, e in self.terms if e < at))
        above = GaugeExpansion(tuple((c, e) for c, e in self.terms if e >= at), self.order)
        return below, above

    # -- arithmetic ------------------------------------------------------

    def __add__(self, other):
        if not isinstance(other, GaugeExpansion):
            other = GaugeExpansion.constant(other)
        return GaugeExpansion(self.terms + other.terms, min(self.order, other.order))

    __radd__ = __add__

    def __neg__(self):
        return GaugeExpansion(tuple((-c, e) for c, e in self.terms), self.order)

    def __sub__(self, other):
        if not isinstance(other, GaugeExpansion):
            other = GaugeExpansion.constant(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: float) -> GaugeExpansion:
        if c == 0:
            return GaugeExpansion()
        return GaugeExpansion(tuple((c * cc, e) for cc, e in self.terms), self.order)

    def shift(self, e) -> GaugeExpansion:
        """Multiply by ``eps**e``."""
        e = as_rational(e)
        return GaugeExpansion(tuple((c, ee + e) for c, ee in self.terms), self.order + e)

    def __mul__(self, other):
        if not isinstance(other, GaugeExpansion):
            return self.scale(float(other))
        pairs = [(e1 + e2, c1 * c2) for c1, e1 in self.terms for c2, e2 in other.terms]
        if self.order == INF and other.order == INF:
            order = INF
        else:
            order = min(self.low + other.order, other.low + self.order)
        return GaugeExpansion(tuple((c, e) for e, c in pairs), order)

    __rmul__ = __mul__

    def power(self, n: int, window=None) -> GaugeExpansion:
        if n < 0:
            return self.invert(window).power(-n, window)
        result = GaugeExpansion.constant(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def _relative_window(self, window):
        if window is None:
            window = config.current().order_window
        c0, e0 = self.leading
        return c0, e0, min(Fraction(window), self.order - e0)

    def invert(self, window=None) -> GaugeExpansion:
        """Leading-term inverse times a geometric series, truncated at the window."""
        if self.is_zero:
            raise ZeroDivisionError("inverse of a zero expansion")
        c0, e0, w = self._relative_window(window)
        u = self.shift(-e0).scale(1.0 / c0) - 1.0
        series = _series_in(u, [(-1.0) ** n for n in range(_series_len(u, w))], w)
        return series.scale(1.0 / c0).shift(-e0)

    def fractional_power(self, p: Fraction, window=None) -> GaugeExpansion:
        """``self**p`` by the binomial series around the leading term."""
        p = as_rational(p)
        if p.denominator == 1 and p >= 0:
            return self.power(int(p))
        if self.is_zero:
            if p > 0:
                return GaugeExpansion((), self.order * p if self.order != INF else INF)
            raise ZeroDivisionError("negative power of a zero expansion")
        c0, e0, w = self._relative_window(window)
        if c0 < 0 and p.denominator % 2 == 0:
            raise ValueError("even root of a negative leading coefficient")
        lead = abs(c0) ** float(p)
        if c0 < 0 and p.numerator % 2:
            lead = -lead
        u = self.shift(-e0).scale(1.0 / c0) - 1.0
        n = _series_len(u, w)
        coeffs, b = [], 1.0
        for j in range(n):
            coeffs.append(b)
            b = b * float(p - j) / (j + 1)
        return _series_in(u, coeffs, w).scale(lead).shift(e0 * p)

    # -- sampling --------------------------------------------------------

    def sample(self, ks) -> np.ndarray:
        ks = np.asarray(ks, dtype=float)
        out = np.zeros(ks.shape)
        for c, e in self.terms:
            out = out + c * np.exp2(-ks * float(e))
        return out

    def sample_mp(self, k: int):
        two = mpmath.mpf(2)
        return mpmath.fsum(mpmath.mpf(c) * two ** (-k * mpmath.mpf(e.numerator) / e.denominator) for c, e in self.terms)

    def __repr__(self) -> str:
        if not self.terms:
            body = "0"
        else:
            body = " + ".join(f"{c!r}*eps^({e})" for c, e in self.terms)
        if self.order != INF:
            body += f" + O(eps^({self.order}))"
        return body


def _series_len(u: GaugeExpansion, w) -> int:
    """Number of terms of a power series in ``u`` needed to reach order ``w``."""
    if u.is_zero:
        return 1
    v = u.low
    if v <= 0:
        raise ValueError("series argument must be infinitesimal")
    cap = config.current().term_cap
    return min(int(math.ceil(w / v)) + 1, cap) if w != INF else cap


def _series_in(u: GaugeExpansion, coeffs: list[float], w) -> GaugeExpansion:
    """``sum coeffs[n] * u**n`` truncated at exponent ``w`` (Horner form)."""
    acc = GaugeExpansion.constant(coeffs[-1])
    for c in reversed(coeffs[:-1]):
        acc = (acc * u).truncate(w) + c
    n = len(coeffs)
    if not u.is_zero:
        # the first omitted term sits at exponent n * low(u)
        acc = acc.truncate(min(w, n * u.low))
    return acc


# ---------------------------------------------------------------------------
# oscillatory terms


TRIG_KINDS = ("cos", "sin")


@dataclass(frozen=True)
class TrigTerm:
    amplitude: GaugeExpansion
    kind: str
    multiplier: int
    rate: Fraction

    def __post_init__(self):
        if self.kind not in TRIG_KINDS:
            raise ValueError(f"unknown trig kind {self.kind!r}")
        if self.multiplier < 1:
            raise ValueError("multiplier must be >= 1")
        if as_rational(self.rate) <= 0:
            raise ValueError("base rate must be positive")
        object.__setattr__(self, "rate", as_rational(self.rate))

    def phase(self, ks) -> np.ndarray:
        ks = np.asarray(ks, dtype=float)
        return self.multiplier * np.exp2(ks * float(self.rate))

    def sample(self, ks) -> np.ndarray:
        fn = np.sin if self.kind == "sin" else np.cos
        return self.amplitude.sample(ks) * fn(self.phase(ks))

    def sample_mp(self, k: int):
        fn = mpmath.sin if self.kind == "sin" else mpmath.cos
        arg = self.multiplier * mpmath.mpf(2) ** (k * mpmath.mpf(self.rate.numerator) / self.rate.denominator)
        return self.amplitude.sample_mp(k) * fn(arg)

    def to_json(self) -> dict:
        return {
            "amplitude": self.amplitude.to_json(),
            "kind": self.kind,
            "m": self.multiplier,
            "rate": fmt_rational(self.rate),
        }

    @classmethod
    def from_json(cls, data: dict) -> TrigTerm:
        return cls(GaugeExpansion.from_json(data["amplitude"]), data["kind"], int(data["m"]), Fraction(data["rate"]))


class RateMismatch(ValueError):
    """Two oscillatory parts with different base rates met in one branch."""


def _trig_product(a: TrigTerm, b: TrigTerm):
    """Product-to-sum: returns (polynomial part, list of trig terms)."""
    amp = (a.amplitude * b.amplitude).scale(0.5)
    m_sum = a.multiplier + b.multiplier
    m_diff = a.multiplier - b.multiplier
    sign_diff = 1.0 if m_diff >= 0 else -1.0
    rate = a.rate
    poly = GaugeExpansion()
    out = []

    def add(kind, m, coef):
        nonlocal poly
        if m == 0:
            if kind == "cos":
                poly = poly + amp.scale(coef)
            return
        out.append(TrigTerm(amp.scale(coef), kind, m, rate))

    kinds = (a.kind, b.kind)
    if kinds == ("sin", "sin"):
        add("cos", abs(m_diff), 1.0)
        add("cos", m_sum, -1.0)
    elif kinds == ("cos", "cos"):
        add("cos", abs(m_diff), 1.0)
        add("cos", m_sum, 1.0)
    elif kinds == ("sin", "cos"):
        add("sin", m_sum, 1.0)
        add("sin", abs(m_diff), sign_diff)
    else:
        add("sin", m_sum, 1.0)
        add("sin", abs(m_diff), -sign_diff)
    return poly, out


@dataclass(frozen=True)
class Branch:
    """One representative net: a polynomial part plus oscillatory parts."""

    poly: GaugeExpansion = GaugeExpansion()
    trig: tuple[TrigTerm, ...] = ()

    def __post_init__(self):
        rates = {t.rate for t in self.trig}
        if len(rates) > 1:
            raise RateMismatch(f"trig parts with different base rates {sorted(rates)}")
        merged: dict[tuple[str, int], GaugeExpansion] = {}
        rate = next(iter(rates)) if rates else None
        for t in self.trig:
            key = (t.kind, t.multiplier)
            merged[key] = merged[key] + t.amplitude if key in merged else t.amplitude
        trig = tuple(
            TrigTerm(amp, kind, m, rate)
            for (kind, m), amp in sorted(merged.items())
            if not (amp.is_zero and amp.is_exact)
        )
        object.__setattr__(self, "trig", trig)

    @classmethod
    def constant(cls, c: float) -> Branch:
        return cls(GaugeExpansion.constant(c))

    @property
    def rate(self):
        return self.trig[0].rate if self.trig else None

    @property
    def is_zero(self) -> bool:
        return self.poly.is_zero and self.poly.is_exact and not self.trig

    @property
    def is_polynomial(self) -> bool:
        return not self.trig

    @property
    def order(self):
        return min([self.poly.order] + [t.amplitude.order for t in self.trig])

    def valuation(self):
        """(value, is_lower_bound) of this branch alone."""
        candidates = [self.poly.low] + [t.amplitude.low for t in self.trig]
        value = min(candidates)
        known = [lt[1] for lt in [self.poly.leading] + [t.amplitude.leading for t in self.trig] if lt is not None]
        bound = value != INF and (not known or min(known) > value)
        return value, bound

    def oscillation_dominates(self) -> bool:
        """True when a trig amplitude reaches the leading polynomial exponent."""
        if not self.trig:
            return False
        lead = self.poly.low
        return any(t.amplitude.low <= lead for t in self.trig)

    def __add__(self, other: Branch) -> Branch:
        return Branch(self.poly + other.poly, self.trig + other.trig)

    def __neg__(self) -> Branch:
        return Branch(-self.poly, tuple(TrigTerm(-t.amplitude, t.kind, t.multiplier, t.rate) for t in self.trig))

    def __sub__(self, other: Branch) -> Branch:
        return self + (-other)

    def scale_by(self, g: GaugeExpansion) -> Branch:
        return Branch(self.poly * g, tuple(TrigTerm(t.amplitude * g, t.kind, t.multiplier, t.rate) for t in self.trig))

    def __mul__(self, other: Branch) -> Branch:
        if self.trig and other.trig and self.rate != other.rate:
            raise RateMismatch("product of trig parts with different base rates")
        poly = self.poly * other.poly
        trig = [TrigTerm(t.amplitude * other.poly, t.kind, t.multiplier, t.rate) for t in self.trig]
        trig += [TrigTerm(t.amplitude * self.poly, t.kind, t.multiplier, t.rate) for t in other.trig]
        for a in self.trig:
            for b in other.trig:
                p, ts = _trig_product(a, b)
                poly = poly + p
                trig.extend(ts)
        return Branch(poly, tuple(trig))

    def truncate(self, order) -> Branch:
        return Branch(
            self.poly.truncate(order),
            tuple(TrigTerm(t.amplitude.truncate(order), t.kind, t.multiplier, t.rate) for t in self.trig),
        )

    def invert(self, window=None) -> Branch:
        if not self.trig:
            return Branch(self.poly.invert(window))
        if self.oscillation_dominates():
            raise ValueError("oscillatory leading part")
        if window is None:
            window = config.current().order_window
        lead = self.poly.low
        pinv = self.poly.invert(window)
        w = -lead + min(Fraction(window), self.order - lead)
        u = Branch(GaugeExpansion(), self.trig).scale_by(pinv)
        v = min(t.amplitude.low for t in u.trig)
        n = min(int(math.ceil((w + lead) / v)) + 1, config.current().term_cap)
        acc = Branch.constant(1.0)
        term = Branch.constant(1.0)
        for _ in range(n):
            term = (term * -u).truncate(w + lead)
            acc = acc + term
        return (acc.truncate(w + lead)).scale_by(pinv).truncate(w)

    def sample(self, ks) -> np.ndarray:
        out = self.poly.sample(ks)
        for t in self.trig:
            out = out + t.sample(ks)
        return out

    def sample_mp(self, k: int):
        return self.poly.sample_mp(k) + mpmath.fsum(t.sample_mp(k) for t in self.trig)

    def to_json(self) -> dict:
        out = self.poly.to_json()
        if self.trig:
            out["trig"] = [t.to_json() for t in self.trig]
        return out

    @classmethod
    def from_json(cls, data: dict) -> Branch:
        return cls(GaugeExpansion.from_json(data), tuple(TrigTerm.from_json(t) for t in data.get("trig", ())))


@dataclass(frozen=True)
class Valuation:
    value: Fraction | float
    tier: str = "exact"
    bound: bool = False

    @property
    def exact(self) -> bool:
        return self.tier == "exact"

    @property
    def norm(self) -> float:
        if self.value == INF:
            return 0.0
        return math.exp(-float(self.value))

    def __float__(self) -> float:
        return float(self.value)

    def to_json(self) -> str:
        if self.tier == "exact":
            return fmt_rational(self.value)
        return repr(float(self.value))
