"""Random exact-tier numbers for property tests.

Each generated number comes with its exponent/coefficient table so tests
can compute the expected valuation without calling the library.
"""

import random
from fractions import Fraction

from hypothesis import strategies as st

from gcalc.idempotent import Idempotent
from gcalc.number import GeneralizedNumber

EXPONENTS = [Fraction(n, d) for n in range(-4, 7) for d in (1, 2, 3)]
COEFFS = [-3.0, -2.0, -1.0, -0.5, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0]


def build(table):
    x = GeneralizedNumber.real(0.0)
    for e, c in table.items():
        x = x + GeneralizedNumber.alpha(e) * c
    return x


tables = st.dictionaries(st.sampled_from(EXPONENTS), st.sampled_from(COEFFS), min_size=1, max_size=3)
idempotents = st.builds(
    Idempotent,
    st.text(alphabet="01", max_size=3),
    st.text(alphabet="01", min_size=1, max_size=3),
)


@st.composite
def exact_numbers(draw, allow_interleave=True):
    x = build(draw(tables))
    if allow_interleave and draw(st.booleans()):
        e = draw(idempotents)
        y = build(draw(tables))
        x = GeneralizedNumber.interleave([(e, x), (~e, y)])
    return x


def random_table(rng: random.Random, size=None):
    size = size or rng.randint(1, 3)
    return {rng.choice(EXPONENTS): rng.choice(COEFFS) for _ in range(size)}


def random_idempotent(rng: random.Random):
    pre = "".join(rng.choice("01") for _ in range(rng.randint(0, 3)))
    per = "".join(rng.choice("01") for _ in range(rng.randint(1, 4)))
    return Idempotent(pre, per)


def random_interleaving(rng: random.Random, zero_rate=0.4):
    """Two- or three-way interleaving where some pieces vanish."""
    e = random_idempotent(rng)
    pieces = [(e, None), (~e, None)]
    if rng.random() < 0.5:
        f = random_idempotent(rng)
        pieces = [(e & f, None), (e & ~f, None), (~e, None)]
    out = []
    for g, _ in pieces:
        value = GeneralizedNumber.real(0.0) if rng.random() < zero_rate else build(random_table(rng))
        out.append((g, value))
    return GeneralizedNumber.interleave(out)


def random_expr(rng: random.Random, depth=4):
    """A random expression tree covering every node of the grammar."""
    from gcalc import expr as E

    if depth == 0 or rng.random() < 0.25:
        c = rng.random()
        if c < 0.3:
            return E.Const(rng.choice([0.0, 1.0, 2.5, -3.0, 0.125, 1e-3, 7.0]))
        if c < 0.6:
            return E.Var(rng.choice(E.VARIABLES))
        if c < 0.75:
            return E.Eps()
        return E.Alpha(Fraction(rng.randint(-4, 4), rng.choice([1, 1, 2, 3])))
    sub = lambda: random_expr(rng, depth - 1)  # noqa: E731
    c = rng.random()
    if c < 0.45:
        return E.BinOp(rng.choice("+-*/"), sub(), sub())
    if c < 0.55:
        return E.Pow(sub(), Fraction(rng.randint(-3, 4), rng.choice([1, 1, 2])))
    if c < 0.7:
        return E.Func(rng.choice(E.FUNCTIONS), sub())
    if c < 0.78:
        kind = rng.choice(E.DISTRIBUTIONS)
        # only delta carries a derivative order
        return E.Dist(kind, sub(), rng.choice([0, 0, 1, 2]) if kind == "delta" else 0)
    if c < 0.84:
        return E.Rho(sub(), rng.randint(0, 2), rng.choice([None, 2, 6]))
    if c < 0.88:
        return E.RhoInt(sub(), rng.randint(1, 2), rng.choice([None, 4]))
    if c < 0.92:
        return E.Quanta(sub())
    e = Idempotent(rng.choice(["", "1", "01"]), rng.choice(["10", "110", "0"]))
    return E.Interleave(e, sub(), sub())
