"""Idempotents of the generalized reals as eventually periodic index sets.

An idempotent is the characteristic function of a subset of the dyadic
lattice ``k = 1, 2, 3, ...``.  Membership of ``k`` reads the preperiod
first and then cycles through the period.  Boolean operations act
pointwise and always return the canonical form (minimal period, then
minimal preperiod), so structural equality is sequence equality.

Germ-level questions (is this idempotent zero as an element of the ring?)
only look at the periodic part.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np


def _check_bits(bits: str, what: str) -> None:
    if any(ch not in "01" for ch in bits):
        raise ValueError(f"{what} must be a bitstring, got {bits!r}")


def _minimal_period(period: str) -> str:
    n = len(period)
    for d in range(1, n + 1):
        if n % d == 0 and period[:d] * (n // d) == period:
            return period[:d]
    return period


@dataclass(frozen=True, order=True)
class Idempotent:
    pre: str
    per: str

    def __post_init__(self):
        _check_bits(self.pre, "preperiod")
        _check_bits(self.per, "period")
        if not self.per:
            raise ValueError("period must be nonempty")
        pre, per = self.pre, _minimal_period(self.per)
        # rotate the period backwards while the preperiod repeats it
        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = per[-1] + per[:-1]
        object.__setattr__(self, "pre", pre)
        object.__setattr__(self, "per", per)

    @classmethod
    def one(cls) -> Idempotent:
        return cls("", "1")

    @classmethod
    def zero(cls) -> Idempotent:
        return cls("", "0")

    @classmethod
    def from_json(cls, data: dict) -> Idempotent:
        return cls(data.get("pre", ""), data["per"])

    def to_json(self) -> dict:
        return {"pre": self.pre, "per": self.per}

    def __call__(self, k: int) -> int:
        if k < 1:
            raise ValueError("lattice indices start at 1")
        if k <= len(self.pre):
            return int(self.pre[k - 1])
        return int(self.per[(k - len(self.pre) - 1) % len(self.per)])

    def mask(self, ks) -> np.ndarray:
        """Boolean membership array for an iterable of lattice indices."""
        ks = np.asarray(ks, dtype=np.int64)
        out = np.empty(ks.shape, dtype=bool)
        npre = len(self.pre)
        pre = np.frombuffer(self.pre.encode(), dtype=np.uint8) == ord("1")
        per = np.frombuffer(self.per.encode(), dtype=np.uint8) == ord("1")
        early = ks <= npre
        out[early] = pre[ks[early] - 1]
        out[~early] = per[(ks[~early] - npre - 1) % len(per)]
        return out

    # -- Boolean algebra -------------------------------------------------

    def _combine(self, other: Idempotent, op) -> Idempotent:
        npre = max(len(self.pre), len(other.pre))
        nper = math.lcm(len(self.per), len(other.per))
        bits = [op(self(k), other(k)) for k in range(1, npre + nper + 1)]
        text = "".join(str(b) for b in bits)
        return Idempotent(text[:npre], text[npre:])

    def __and__(self, other: Idempotent) -> Idempotent:
        return self._combine(other, lambda a, b: a & b)

    def __or__(self, other: Idempotent) -> Idempotent:
        return self._combine(other, lambda a, b: a | b)

    def __xor__(self, other: Idempotent) -> Idempotent:
        return self._combine(other, lambda a, b: a ^ b)

    def __invert__(self) -> Idempotent:
        flip = str.maketrans("01", "10")
        return Idempotent(self.pre.translate(flip), self.per.translate(flip))

    # -- predicates ------------------------------------------------------

    @property
    def is_empty(self) -> bool:
        """Identically zero on the whole lattice."""
        return self.pre == "" and self.per == "0"

    @property
    def is_full(self) -> bool:
        return self.pre == "" and self.per == "1"

    @property
    def germ_zero(self) -> bool:
        """Zero as an element of the ring: only finitely many members."""
        return "1" not in self.per

    @property
    def germ_one(self) -> bool:
        return "0" not in self.per

    @property
    def nontrivial(self) -> bool:
        return not (self.germ_zero or self.germ_one)

    def germ_equal(self, other: Idempotent) -> bool:
        return (self ^ other).germ_zero

    @property
    def density(self) -> Fraction:
        """Asymptotic density of the member set."""
        return Fraction(self.per.count("1"), len(self.per))

    def __repr__(self) -> str:
        return f'idem("{self.pre}","{self.per}")'


def idem_and(e: Idempotent, f: Idempotent) -> Idempotent:
    return e & f


def idem_or(e: Idempotent, f: Idempotent) -> Idempotent:
    return e | f


def idem_not(e: Idempotent) -> Idempotent:
    return ~e


def idem_canonical(e: Idempotent) -> Idempotent:
    # construction already canonicalizes; kept for the public surface
    return Idempotent(e.pre, e.per)


def is_partition(es) -> bool:
    """True when ``es`` is complete and pairwise orthogonal on every index."""
    es = list(es)
    if not es:
        return False
    total = Idempotent.zero()
    for i, e in enumerate(es):
        for f in es[i + 1 :]:
            if not (e & f).is_empty:
                return False
        total = total | e
    return total.is_full
