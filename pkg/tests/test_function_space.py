import math

import mpmath
import numpy as np
import pytest
from scipy import integrate

from gcalc.errors import ConfigError, DomainError, EmbeddingError, QuadratureError
from gcalc.expr import Var, diff, eval_array
from gcalc.functions import (
    GeneralizedFunction,
    classical_pairing,
    embed_distribution,
    embed_smooth,
    evaluate,
    fn_compose,
    pairing,
)
from gcalc.mollifier import mollifier_build
from gcalc.number import GeneralizedNumber as G, shadow, valuation
from gcalc.parser import parse


def oracle_coefficients(q):
    """Solve the moment conditions for P(u^2) with numpy.

    Gaussian moments: int u^(2n) e^(-u^2) du / sqrt(pi) = (2n-1)!! / 2^n.
    """
    n = q // 2 + 1

    def m(j):
        return math.prod(range(1, 2 * j, 2)) / 2**j

    A = np.array([[m(i + j) for j in range(n)] for i in range(n)])
    b = np.zeros(n)
    b[0] = 1.0
    return np.linalg.solve(A, b)


def oracle_rho(q, u):
    c = oracle_coefficients(q)
    return sum(cj * u ** (2 * j) for j, cj in enumerate(c)) * np.exp(-u * u) / math.sqrt(math.pi)


@pytest.mark.parametrize("q", [0, 2, 4, 6, 8])
def test_coefficients_match_oracle(q):
    spec = mollifier_build(q)
    assert np.allclose(spec.float_coefficients, oracle_coefficients(q), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("q", [0, 2, 4, 6, 8])
def test_moments_by_scipy(q):
    spec = mollifier_build(q)
    # the tails beyond |u| = 14 are below 1e-80
    total, _ = integrate.quad(spec, -14, 14, epsabs=1e-13, limit=200)
    assert abs(total - 1) <= 1e-10
    for k in range(1, q + 1):
        mk, _ = integrate.quad(lambda u: u**k * spec(u), -14, 14, epsabs=1e-11, limit=400)
        assert abs(mk) <= 1e-8


def test_large_order_rejected():
    with pytest.raises(ConfigError):
        mollifier_build(13)


def test_antiderivatives_by_quadrature():
    spec = mollifier_build(6)
    R, S = spec.antiderivative(1), spec.antiderivative(2)
    for u in (-2.0, -0.3, 0.0, 0.7, 3.0):
        r, _ = integrate.quad(spec, -np.inf, u)
        s, _ = integrate.quad(lambda v: integrate.quad(spec, -np.inf, v)[0], -12.0, u)
        assert R(u) == pytest.approx(r, abs=1e-10)
        assert S(u) == pytest.approx(s, abs=1e-8)
    assert R(0.0) == pytest.approx(0.5, abs=1e-15)


def test_embed_smooth_rejects_distributions():
    with pytest.raises(EmbeddingError):
        embed_smooth("delta(x)")


def test_delta_at_zero():
    x = evaluate(embed_distribution("delta"), 0.0)
    assert valuation(x).value == -1
    assert x.expansion.coefficient(-1) == pytest.approx(oracle_rho(6, 0.0), abs=1e-12)


@pytest.mark.parametrize("x0", [0.5, 1.0, 2.0])
def test_x_delta_at_infinitesimal(x0):
    f = embed_distribution("x*delta(x)")
    v = evaluate(f, G.alpha(1) * x0)
    assert shadow(v) == pytest.approx(x0 * oracle_rho(6, x0), abs=1e-9)


def test_heaviside_square_minus_itself():
    h = embed_distribution("heaviside")
    v = evaluate(h * h - h, 0.0)
    assert shadow(v) == pytest.approx(-0.25, abs=1e-12)


def test_lowered_sign_and_abs():
    s = embed_distribution("sign(x)")
    a = embed_distribution("abs(x)")
    xs = np.linspace(-1, 1, 11)
    assert np.allclose(s.sample(xs, [30])[0][xs != 0], np.sign(xs[xs != 0]), atol=1e-12)
    assert np.allclose(a.sample(xs, [30])[0], np.abs(xs), atol=1e-8)


def test_derivative_of_heaviside_is_delta_on_grid():
    h = embed_distribution("heaviside")
    d = embed_distribution("delta")
    xs = np.linspace(-1e-3, 1e-3, 64)
    for k in (8, 12):
        a = h.derivative().sample(xs, [k])[0]
        b = d.sample(xs, [k])[0]
        assert np.max(np.abs(a - b)) <= 1e-9 * np.max(np.abs(b))


def test_evaluate_rejects_infinite_point():
    with pytest.raises(DomainError):
        evaluate(embed_smooth("sin(x)"), G.alpha(-1))


def test_evaluate_multivariate_named():
    f = embed_smooth("x*t")
    assert shadow(evaluate(f, t=2.0, x=3.0)) == 6.0


def test_compose_checks_image():
    f = embed_smooth("sin(x)")
    g = embed_smooth("x/eps")
    with pytest.raises(DomainError):
        fn_compose(f, g)
    h = fn_compose(f, embed_smooth("2*x"))
    assert shadow(evaluate(h, 0.25)) == pytest.approx(math.sin(0.5))


@pytest.mark.parametrize(
    "name, expected, k",
    [("delta", 1.0, 40), ("heaviside", math.sqrt(math.pi) / 2 + 0.5, 40), ("delta'", -1.0, 16)],
)
def test_pairing_float_path_against_classical(name, expected, k):
    # expected values: phi(0), int_0^inf phi, -phi'(0) for phi = exp(-x^2)(1+x)
    phi = "exp(-x^2)*(1+x)"
    got = pairing(embed_distribution(name), phi, ks=[k]).samples[k - 1]
    assert got == pytest.approx(expected, abs=1e-9)
    assert classical_pairing(name, phi) == pytest.approx(expected, abs=1e-9)


def test_delta_prime_needs_mp_at_depth():
    t = embed_distribution("delta'")
    with pytest.raises(QuadratureError) as info:
        pairing(t, "exp(-x^2)*(1+x)", ks=[40])
    assert info.value.diagnostics["k"] == 40
    got = pairing(t, "exp(-x^2)*(1+x)", ks=[40], dps=40).samples[39]
    assert abs(got + 1) < 1e-30


def test_classical_pairing_rejects_embedded():
    with pytest.raises(EmbeddingError):
        classical_pairing(embed_distribution("delta"), "exp(-x^2)")


def test_symbolic_derivative_matches_finite_difference():
    e = parse("atan(x/eps)*exp(-x^2)")
    d = diff(e, "x")
    xs = np.linspace(-1, 1, 9)
    h = 1e-6
    eps = 2.0**-3
    num = (eval_array(e, {"x": xs + h}, eps, 3) - eval_array(e, {"x": xs - h}, eps, 3)) / (2 * h)
    assert np.allclose(eval_array(d, {"x": xs}, eps, 3), num, atol=1e-6)


def test_generalized_function_variables_sorted():
    f = GeneralizedFunction(parse("x/(t+alpha(1))"))
    assert f.variables == ("t", "x")
    assert GeneralizedFunction(Var("y")).variables == ("y",)


def test_embedding_is_multiplicative_on_smooth_inputs():
    f, g = embed_smooth("sin(x)"), embed_smooth("exp(-x^2)+x")
    fg = embed_smooth("sin(x)*(exp(-x^2)+x)")
    xs = np.linspace(-2, 2, 33)
    ks = np.arange(1, 49)
    assert np.max(np.abs((f * g).sample(xs, ks) - fg.sample(xs, ks))) <= 1e-10


def _exact_pairing(name):
    # phi = exp(-x^2)(1+x) on [-8, 8], to 60 digits
    if name == "delta":
        return mpmath.mpf(1)
    if name == "delta'":
        return mpmath.mpf(-1)
    return mpmath.sqrt(mpmath.pi) / 2 * mpmath.erf(8) + (1 - mpmath.exp(-64)) / 2


@pytest.mark.parametrize("name", ["delta", "delta'", "heaviside"])
def test_pairing_residual_improves_with_order(name):
    from gcalc.number import estimate_valuation

    ks = [12, 16, 20]
    vals = []
    with mpmath.workdps(60):
        exact = _exact_pairing(name)
        for q in (2, 4):
            g = pairing(embed_distribution(name, q), "exp(-x^2)*(1+x)", ks=ks, dps=60)
            res = [abs(g.samples[k - 1] - exact) for k in ks]
            vals.append(estimate_valuation(res, ks=ks, start=0))
    assert vals[1] >= vals[0] - 0.05
