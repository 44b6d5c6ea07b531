"""A contraction with an infinitesimal parameter: sqrt(2 + alpha(1))."""

import mpmath

from gcalc import GeneralizedNumber as G
from gcalc.calculus import fixed_point_solve, in_sharp_ball

babylon = "(x + (2 + eps)/x)/2"
r = fixed_point_solve(babylon, 0.5, 3, 1.5)
print("verdict:", r.verdict)
print("iterations per index:", r.n0.to_json())
for k, n, gap in r.gaps[::8]:
    print(f"  k={k:2d} iterations={n:4d} log2 gap={gap:.1f}")

x = r.value
print("squares to 2 + alpha(1) within V_3:", in_sharp_ball(x * x, G.real(2.0) + G.alpha(1), 3))
other = fixed_point_solve(babylon, 0.5, 3, 2.0).value
print("independent of the seed:", in_sharp_ball(x, other, 3))
with mpmath.workdps(30):
    print("x at k=40:", mpmath.nstr(x.samples[39], 25))
