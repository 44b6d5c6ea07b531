"""Finite-order mollifiers ``rho(u) = P(u**2) exp(-u**2) / sqrt(pi)``.

Every profile used by the embeddings (the mollifier, its derivatives and
its first two antiderivatives) lies in the space of functions

    F(u) = p(u) g(u) + s(u) Phi(u),   g = exp(-u**2)/sqrt(pi),  Phi = erfc(-u)/2,

with rational polynomials ``p`` and ``s``.  The space is closed under
differentiation and under integration from ``-inf``, so all of them are
kept in closed form (:class:`GaussPoly`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache

import mpmath
import numpy as np
from scipy import special

from .errors import ConfigError

MAX_ORDER = 12
SQRT_PI = math.sqrt(math.pi)


def _trim(coeffs) -> tuple[Fraction, ...]:
    out = [Fraction(c) for c in coeffs]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


def _deriv(p):
    return _trim(i * c for i, c in enumerate(p) if i)


def _integ(p):
    # antiderivative vanishing at 0
    return _trim([Fraction(0)] + [c / (i + 1) for i, c in enumerate(p)])


def _add(p, q):
    n = max(len(p), len(q))
    return _trim((p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n))


def _times_u(p, c=1):
    return _trim([Fraction(0)] + [c * a for a in p])


def _horner(p, u):
    acc = 0 * u
    for c in reversed(p):
        acc = acc * u + float(c)
    return acc


def _horner_mp(p, u):
    acc = mpmath.mpf(0)
    for c in reversed(p):
        acc = acc * u + mpmath.mpf(c.numerator) / c.denominator
    return acc


@dataclass(frozen=True)
class GaussPoly:
    """``p(u) g(u) + s(u) Phi(u)`` with rational polynomial coefficients."""

    p: tuple[Fraction, ...] = ()
    s: tuple[Fraction, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "p", _trim(self.p))
        object.__setattr__(self, "s", _trim(self.s))

    def derivative(self) -> GaussPoly:
        # (p g)' = (p' - 2u p) g ;  (s Phi)' = s' Phi + s g
        return GaussPoly(_add(_add(_deriv(self.p), _times_u(self.p, -2)), self.s), _deriv(self.s))

    def antiderivative(self) -> GaussPoly:
        """Integral from ``-inf``; requires the result to vanish there."""
        s1 = _integ(self.s)
        q = _add(self.p, tuple(-c for c in s1))
        # solve a' - 2u a + c = q from the top degree down
        n = len(q) - 1
        a = [Fraction(0)] * max(n, 0)
        rest = list(q)
        for d in range(n, 0, -1):
            coef = rest[d] / -2
            a[d - 1] = coef
            rest[d] = Fraction(0)
            if d - 2 >= 0:
                rest[d - 2] -= (d - 1) * coef
        c = rest[0] if rest else Fraction(0)
        return GaussPoly(tuple(a), _add(s1, (c,)))

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        out = _horner(self.p, u) * np.exp(-u * u) / SQRT_PI if self.p else np.zeros(u.shape)
        if self.s:
            out = out + _horner(self.s, u) * special.erfc(-u) / 2
        return out

    def mp(self, u):
        u = mpmath.mpf(u)
        out = mpmath.mpf(0)
        if self.p:
            out += _horner_mp(self.p, u) * mpmath.exp(-u * u) / mpmath.sqrt(mpmath.pi)
        if self.s:
            out += _horner_mp(self.s, u) * mpmath.erfc(-u) / 2
        return out

    def taylor(self, u0: float, n: int) -> list[float]:
        """Coefficients ``F^(j)(u0)/j!`` for ``j < n``."""
        out, f, fact = [], self, 1.0
        for j in range(n):
            out.append(float(f(u0)) / fact)
            f = f.derivative()
            fact *= j + 1
        return out

    @property
    def tail_poly(self) -> tuple[Fraction, ...]:
        """Behaviour at ``+inf`` up to negligible terms; it is 0 at ``-inf``."""
        return self.s


def _moment(n: int) -> Fraction:
    """Integral of ``u**(2n) exp(-u**2)/sqrt(pi)``."""
    return Fraction(math.factorial(2 * n), 4**n * math.factorial(n))


@dataclass(frozen=True)
class MollifierSpec:
    order: int
    coefficients: tuple[Fraction, ...]

    @property
    def float_coefficients(self) -> tuple[float, ...]:
        return tuple(float(c) for c in self.coefficients)

    @cached_property
    def rho(self) -> GaussPoly:
        p = [Fraction(0)] * (2 * len(self.coefficients) - 1)
        for i, a in enumerate(self.coefficients):
            p[2 * i] = a
        return GaussPoly(tuple(p))

    @cached_property
    def rho0(self) -> float:
        return float(self.coefficients[0]) / SQRT_PI

    def derivative(self, m: int) -> GaussPoly:
        return _derivative(self, m)

    def antiderivative(self, j: int = 1) -> GaussPoly:
        return _antiderivative(self, j)

    def __call__(self, u):
        return self.rho(u)

    def to_json(self) -> dict:
        return {"order": self.order, "coefficients": [str(c) for c in self.coefficients], "rho0": self.rho0}


@lru_cache(maxsize=None)
def _derivative(spec: MollifierSpec, m: int) -> GaussPoly:
    f = spec.rho
    for _ in range(m):
        f = f.derivative()
    return f


@lru_cache(maxsize=None)
def _antiderivative(spec: MollifierSpec, j: int) -> GaussPoly:
    f = spec.rho
    for _ in range(j):
        f = f.antiderivative()
    return f


@lru_cache(maxsize=None)
def mollifier_build(q: int) -> MollifierSpec:
    """Even mollifier with unit mass and vanishing moments of orders ``1..q``.

    Solves the moment system exactly over the rationals.
    """
    if q < 0:
        raise ConfigError("mollifier order must be nonnegative")
    if q > MAX_ORDER:
        raise ConfigError(f"ill-conditioned order: q={q} exceeds {MAX_ORDER}")
    d = q // 2
    n = d + 1
    # rows j: sum_i a_i M(i+j) = [j == 0]
    mat = [[_moment(i + j) for i in range(n)] + [Fraction(int(j == 0))] for j in range(n)]
    for col in range(n):
        piv = next(r for r in range(col, n) if mat[r][col] != 0)
        mat[col], mat[piv] = mat[piv], mat[col]
        for r in range(n):
            if r != col and mat[r][col] != 0:
                f = mat[r][col] / mat[col][col]
                mat[r] = [a - f * b for a, b in zip(mat[r], mat[col])]
    coeffs = tuple(mat[i][n] / mat[i][i] for i in range(n))
    return MollifierSpec(q, coeffs)
