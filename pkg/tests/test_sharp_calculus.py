import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from gcalc import config
from gcalc.algebra import is_identically_zero, simplify
from gcalc.calculus import (
    AffineIndex,
    ContractionIndex,
    ExpIndex,
    HyperNatural,
    check_witness,
    difference_quotient,
    dsa_check,
    fixed_point_solve,
    grid_distance,
    hyperseq_limit,
    in_sharp_ball,
    inversion_map,
    quanta_eval,
    seminorm_profile,
    sharp_derivative,
)
from gcalc.errors import BudgetError, ContractionError, UndecidableError, ZeroElementError
from gcalc.expr import diff, to_text
from gcalc.functions import GeneralizedFunction, embed_distribution, embed_smooth, evaluate
from gcalc.number import GeneralizedNumber as G, norm, shadow, valuation
from gcalc.parser import parse

from strategies import build, random_table


@pytest.mark.parametrize("name, deriv", [("heaviside", "delta"), ("delta", "delta'"), ("delta'", "delta''")])
def test_derivative_commutes_with_embedding(name, deriv):
    a = sharp_derivative(embed_distribution(name))
    b = embed_distribution(deriv)
    xs = np.linspace(-1, 1, 256)
    ks = np.arange(1, 33)
    va, vb = a.sample(xs, ks), b.sample(xs, ks)
    for row_a, row_b in zip(va, vb):
        assert np.max(np.abs(row_a - row_b)) <= 1e-9 * np.max(np.abs(row_b))


@pytest.mark.parametrize("f, x0, dfx0", [("sin(x)", 0.3, math.cos(0.3)), ("x^3", 1.0, 3.0), ("exp(x)", 0.0, 1.0)])
def test_difference_quotient_converges(f, x0, dfx0):
    vals = [valuation(difference_quotient(embed_smooth(f), x0, r) - dfx0).value for r in (1, 2, 4, 8)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
    assert vals[0] > 0


def test_constant_on_catalog_when_derivative_vanishes():
    f = embed_smooth("3+0*x")
    assert is_identically_zero(sharp_derivative(f).expr)
    vals = {shadow(evaluate(f, p)) for p in (0.0, 0.5, G.alpha(1), G.real(-0.7) + G.alpha(2))}
    assert vals == {3.0}


def test_quanta_is_locally_constant_but_not_constant():
    g = GeneralizedFunction(parse("quanta(x)"))
    assert is_identically_zero(g.derivative().expr)
    assert norm(evaluate(g, G.alpha(1))) != norm(evaluate(g, G.real(1.0)))
    vals = [valuation(difference_quotient(g, 0.0, r)).value for r in (1, 2, 4, 8)]
    assert vals == [1, 2, 4, 8]


@pytest.mark.parametrize("seed", range(20))
def test_inversion_map_norm_product(seed):
    x = build(random_table(random.Random(seed)))
    if x.is_zero:
        return
    assert norm(x) * norm(inversion_map(x)) == pytest.approx(1.0, abs=1e-12)


def test_quanta_errors():
    assert quanta_eval(0.0).is_zero
    with pytest.raises(ZeroElementError):
        inversion_map(0.0)
    with pytest.raises(UndecidableError):
        quanta_eval(G.from_samples(np.ones(48)))


def test_in_sharp_ball():
    assert in_sharp_ball(G.real(1.0) + G.alpha(3), 1.0, 2)
    assert not in_sharp_ball(G.real(1.0) + G.alpha(1), 1.0, 2)
    assert in_sharp_ball(G.real(1.0) + G.alpha(2) * 0.5, 1.0, 2)


def test_index_formulas():
    assert AffineIndex(Fraction(3, 2), 1).value(10) == 16
    assert ExpIndex(1, 1).value(5) == 33
    assert HyperNatural.constant(7).value(100) == 7
    assert AffineIndex(2).to_json() == {"a": "2/1", "b": "0/1"}


@pytest.mark.parametrize("lam", [0.5, 0.9, 0.99])
@pytest.mark.parametrize("t", [1, 3, Fraction(1, 2)])
def test_contraction_index_bound(lam, t):
    n0 = ContractionIndex(lam, Fraction(t))
    for k in range(8, 49):
        # compare logarithms: lam^n0 <= 2^(-k t)
        assert n0.value(k) * math.log(lam) <= -k * float(t) * math.log(2) + 1e-12


def test_contraction_iterates_obey_banach_bound():
    lam, b = 0.7, 0.3
    fixed = b / (1 - lam)
    x = 5.0
    d0 = abs(x - fixed)
    for m in range(1, 40):
        x = lam * x + b
        assert abs(x - fixed) <= lam**m * d0 * (1 + 1e-12) + 1e-15


def test_fixed_point_affine():
    r = fixed_point_solve(lambda k, x: 0.5 * x + 1, 0.5, 2, 0.0)
    assert in_sharp_ball(r.value, 2.0, 2)
    assert r.verdict == "CONVERGED"
    assert r.to_json()["witness_n0"] == {"a": "4/1", "b": "0/1"}


def test_fixed_point_expression_map():
    r = fixed_point_solve("0.25*x + alpha(1)", 0.25, 2, 1.0)
    target = [mpmath.mpf(2) ** -k / (1 - mpmath.mpf(0.25)) for k in range(1, 49)]
    assert in_sharp_ball(r.value, G.from_samples(np.array(target, dtype=object)), 2)


def test_fixed_point_rejects_expanding_map():
    with pytest.raises(ContractionError):
        fixed_point_solve(lambda k, x: 2 * x + 1, 0.5, 1, 1.0)
    with pytest.raises(ContractionError):
        fixed_point_solve(lambda k, x: x, 1.5, 1, 1.0)


def test_fixed_point_budget():
    with pytest.raises(BudgetError):
        fixed_point_solve(lambda k, x: 0.999 * x, 0.999, 3, 1.0, budget=1000)


def test_hyperseq_limit_kinds():
    assert hyperseq_limit(lambda n, k: mpmath.mpf(1) / n, 0, 1).to_json()["kind"] == "exp"
    affine = hyperseq_limit(lambda n, k: mpmath.mpf(2) ** -n, 0, 1).to_json()
    assert Fraction(affine["a"]) == pytest.approx(1, abs=0.05)
    assert hyperseq_limit(lambda n, k: 5 + mpmath.mpf(2) ** -k / n, 5, 1).to_json() == {"a": "0/1", "b": "1/1"}


def test_check_witness_rejects_too_small():
    assert not check_witness(lambda n, k: mpmath.mpf(2) ** -n, 0, 1, HyperNatural.of(AffineIndex(Fraction(1, 2))))


def test_seminorm_profile_of_scaled_sine():
    prof = seminorm_profile("alpha(2)*sin(x/eps)", 1.0, 2)
    assert [round(float(v.value), 2) for v in prof.valuations] == [2.0, 1.0, 0.0]


@pytest.mark.parametrize("depth", [32, 48])
def test_dsa_verdicts(depth):
    with config.using(lattice_depth=depth):
        assert dsa_check("alpha(4)*sin(x)", 1.0, 1, 1).verdict == "PASS"
        assert dsa_check("alpha(1)*sin(x)", 1.0, 1, 1).verdict == "VACUOUS"
        assert dsa_check("eps^4*sin(x/eps^4)", 1.0, 1, 1).verdict == "VIOLATION"


def test_grid_distance():
    assert grid_distance("sin(x)", "cos(x)") == pytest.approx(1.0, abs=1e-12)
    assert grid_distance("sin(x)", "sin(x)+alpha(1)") == pytest.approx(math.exp(-1), abs=1e-12)
    assert grid_distance("x^2", "x*x") == 0.0


def test_burgers_residual_is_zero():
    u = parse("x/(t+alpha(1))")
    residual = diff(u, "t") + u * diff(u, "x")
    assert is_identically_zero(residual)
    assert to_text(simplify(residual)) == "0.0"
