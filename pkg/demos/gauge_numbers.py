"""Gauge powers, valuations, zero divisors and supports."""

from fractions import Fraction

from gcalc import GeneralizedNumber as G
from gcalc.idempotent import Idempotent
from gcalc.interleave import invertible_part, support, zero_divisor_witness
from gcalc.number import invert, is_invertible, norm, shadow, valuation


def show(label, x):
    v = valuation(x)
    print(f"{label:<28} valuation={v.value!s:<6} norm={norm(x):.6g} shadow={shadow(x)}")


show("alpha(1/2)*alpha(3/2)", G.alpha(Fraction(1, 2)) * G.alpha(Fraction(3, 2)))
show("(3 + alpha(1)) - 3", G.real(3.0) + G.alpha(1) - 3.0)
show("sin(alpha(-1))", G.trig("sin"))
show("2 + sin(alpha(-1))", G.trig("sin") + 2.0)

# an interleaving that is 0 on odd indices and 1 + alpha(2) on even ones
e = Idempotent("", "10")
x = G.interleave([(e, 0.0), (~e, G.alpha(2) + 1.0)])
print("\ninvertible?", is_invertible(x))
print("annihilating idempotent:", zero_divisor_witness(x))
print("invertible on:", invertible_part(x))
print("1/(1 - alpha(1)) ->", invert(G.real(1.0) - G.alpha(1)).expansion)

for p in (G.trig("sin"), G.alpha(-1), G.real(0.5) + G.alpha(3)):
    print("support:", support(p))
