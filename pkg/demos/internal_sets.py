"""Strong membership decided by invertibility of the distance to the complement."""

from gcalc import GeneralizedNumber as G
from gcalc.internal import (
    Membrane,
    Region,
    distance_to_complement,
    essential_support,
    intersect_strong,
    membrane_member,
    strong_member,
)
from gcalc.number import valuation

unit = Region.box(0.0, 1.0)
for label, p in [("1", G.real(1.0)), ("1 - alpha(2)", G.real(1.0) - G.alpha(2)), ("1/2", G.real(0.5))]:
    d = distance_to_complement(p, unit)
    print(f"{label:<14} distance valuation {valuation(d).value!s:<4} member: {strong_member(p, unit)}")

huge = Region.box("-exp(alpha(-1))", "exp(alpha(-1))")
print("alpha(-20) in the exponential box:", strong_member(G.alpha(-20), huge))

both = intersect_strong(Region.box(0.0, 2.0), Region.box(1.0, 3.0))
print("(0,2) & (1,3) =", both, "; 3/2 member:", strong_member(1.5, both))
lens = intersect_strong(Region.ball((0.0, 0.0), 1.0), Region.ball((1.0, 0.0), 1.0))
print("lens:", lens, "; (1/2, alpha(1)) member:", strong_member((0.5, G.alpha(1)), lens))

m = Membrane(unit)
print("membrane bound L =", m.L)
print("1/2 + 3 alpha(1) on the membrane:", membrane_member(G.real(0.5) + G.alpha(1) * 3.0, m))
print("essential support of sin(alpha(-1)):", essential_support(G.trig("sin")))
