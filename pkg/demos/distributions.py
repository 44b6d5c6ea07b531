"""Embedded distributions: point values, products and pairings."""

import mpmath

from gcalc.functions import embed_distribution, evaluate, pairing
from gcalc.mollifier import mollifier_build
from gcalc.number import GeneralizedNumber as G, shadow, valuation

delta = embed_distribution("delta")
print("delta(0) =", evaluate(delta, 0.0).expansion, " rho(0) =", mollifier_build(6)(0.0))

xd = embed_distribution("x*delta(x)")
for x0 in (0.5, 1.0, 2.0):
    print(f"(x delta)({x0} alpha) has shadow {shadow(evaluate(xd, G.alpha(1) * x0)):.12f}")

h = embed_distribution("heaviside")
print("shadow of (H^2 - H)(0) =", shadow(evaluate(h * h - h, 0.0)))

# the pairing residual shrinks faster as the mollifier order grows
ks = [16, 24, 32]
for q in (2, 4, 6):
    dps = (q + 2) * 10 + 15
    with mpmath.workdps(dps):
        g = pairing(embed_distribution("delta", q), "exp(-x^2)", ks=ks, dps=dps)
        res = [mpmath.nstr(abs(g.samples[k - 1] - 1), 3) for k in ks]
    print(f"q={q}: |<delta, exp(-x^2)> - 1| at k={ks}: {res}")

print("valuation of delta(0):", valuation(evaluate(delta, 0.0)).value)
