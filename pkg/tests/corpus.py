"""Membership corpus: points and box/ball nets given by coefficient tables.

A table maps exponent -> coefficient and stands for ``sum c * eps**e``.
The oracle samples those sums directly with mpmath, so it shares nothing
with the library beyond the input tables.
"""

import random
from fractions import Fraction

import mpmath

from gcalc.idempotent import Idempotent
from gcalc.internal import Region
from gcalc.number import GeneralizedNumber

ORACLE_KS = range(24, 49)
ORACLE_DPS = 150
# any invertible distance in the corpus is at least eps**16
ORACLE_RATE = 16


def num(table):
    x = GeneralizedNumber.real(0.0)
    for e, c in table.items():
        x = x + GeneralizedNumber.alpha(e) * c
    return x


def table_at(table, k):
    return sum((mpmath.mpf(c) * mpmath.mpf(2) ** (-k * mpmath.mpf(e.numerator) / e.denominator)
                for e, c in table.items()), mpmath.mpf(0))


class Coord:
    """A coordinate: one table, or two tables interleaved by an idempotent."""

    def __init__(self, a, b=None, e=None):
        self.a, self.b, self.e = a, b, e

    def number(self):
        if self.e is None:
            return num(self.a)
        return GeneralizedNumber.interleave([(self.e, num(self.a)), (~self.e, num(self.b))])

    def at(self, k):
        if self.e is None or self.e(k):
            return table_at(self.a, k)
        return table_at(self.b, k)

    def shifted(self, table):
        def add(t):
            out = dict(t)
            for e, c in table.items():
                out[e] = out.get(e, 0.0) + c
            return out

        return Coord(add(self.a), None if self.b is None else add(self.b), self.e)


def oracle_distance(kind, coords, params, k):
    pt = [c.at(k) for c in coords]
    if kind == "box":
        lo, hi = params
        d = mpmath.inf
        for x, a, b in zip(pt, lo, hi):
            if a is not None:
                d = min(d, x - table_at(a, k))
            if b is not None:
                d = min(d, table_at(b, k) - x)
    else:
        centre, radius = params
        d = table_at(radius, k) - mpmath.sqrt(sum((x - table_at(c, k)) ** 2 for x, c in zip(pt, centre)))
    return max(mpmath.mpf(0), d) if d != mpmath.inf else mpmath.mpf(1)


def oracle_member(kind, coords, params) -> bool:
    with mpmath.workdps(ORACLE_DPS):
        for k in ORACLE_KS:
            d = oracle_distance(kind, coords, params, k)
            if d <= mpmath.mpf(2) ** (-ORACLE_RATE * k):
                return False
    return True


Z = Fraction(0)
BOUNDS = [
    {Z: 0.0},
    {Z: 1.0},
    {Z: 1.0, Fraction(2): -1.0},
    {Fraction(1): -1.0},
    {Z: 2.0, Fraction(1): 1.0},
]


def _near(rng, table):
    """A point at, just inside or just outside a boundary value."""
    out = dict(table)
    r = rng.random()
    if r < 0.25:
        return out
    e = rng.choice([Fraction(1), Fraction(2), Fraction(3, 2), Fraction(3)])
    out[e] = out.get(e, 0.0) + rng.choice([-1.0, 1.0, 0.5, -2.0])
    return out


def _coord(rng, lo, hi):
    choice = rng.random()
    if choice < 0.35 and lo is not None:
        a = _near(rng, lo)
    elif choice < 0.7 and hi is not None:
        a = _near(rng, hi)
    else:
        a = {Z: rng.choice([0.5, -0.5, 1.5, 3.0]), Fraction(1): rng.choice([0.0, 1.0])}
    if rng.random() < 0.25:
        e = Idempotent("", rng.choice(["10", "110", "01"]))
        b = {Z: rng.choice([0.25, 0.75, 5.0])}
        return Coord(a, b, e)
    return Coord(a)


def build_case(rng):
    if rng.random() < 0.6:
        dim = rng.choice([1, 1, 2])
        lo, hi = [], []
        for _ in range(dim):
            a, b = sorted(rng.sample(range(len(BOUNDS)), 2))
            lo.append(None if rng.random() < 0.1 else BOUNDS[a])
            hi.append(None if rng.random() < 0.1 else BOUNDS[b])
        coords = [_coord(rng, a, b) for a, b in zip(lo, hi)]
        region = Region("box", tuple(float("-inf") if a is None else num(a) for a in lo),
                        tuple(float("inf") if b is None else num(b) for b in hi))
        return region, coords, ("box", (lo, hi))
    centre = [{Z: 0.0}, rng.choice([{Z: 0.0}, {Fraction(1): 1.0}])]
    radius = rng.choice([{Z: 1.0}, {Z: 1.0, Fraction(2): 1.0}, {Fraction(1): 1.0}])
    coords = []
    for c in centre:
        coords.append(Coord(_near(rng, {Z: 0.0, **{e: v for e, v in c.items()}})))
    # push the first coordinate near the sphere
    if rng.random() < 0.6:
        shell = {e: v for e, v in radius.items()}
        coords[0] = Coord(_near(rng, shell))
    region = Region("ball", tuple(num(c) for c in centre), (num(radius),))
    return region, coords, ("ball", (centre, radius))


def corpus(n=200, seed=2024):
    rng = random.Random(seed)
    return [build_case(rng) for _ in range(n)]
