"""Elementary symmetric polynomials, their moment bounds and a tight input.

Run: python3 demos/inequality_tour.py
"""

import numpy as np

from symtail import sympoly

rs = np.random.default_rng(7)
a = rs.normal(size=12)

prof = sympoly.elementary_profile(a, "float")
print("S_0..S_4 of a gaussian vector:", [round(prof.as_float(k), 4) for k in range(5)])

# Newton: S_1^2 - 2 S_2 equals the sum of squares
print("power sum check:", float(sympoly.power_sum_e2(a)), float(np.sum(a ** 2)))

rep = sympoly.theorem12_check(a, "float")
print(f"6e bound: {rep.verdict}, smallest slack {rep.min_slack:.3g}")

exact = sympoly.elementary_profile([sympoly.to_fraction(x) for x in a[:6]], "exact")
for k in (1, 2):
    C = sympoly.minimal_theorem14_constant(exact, k)
    rep = sympoly.theorem14_check(exact, k, C)
    print(f"pivot k={k}: smallest admissible C = {C:.4g}, verdict {rep.verdict}")

# For alternating ±1 vectors the normalized ratio only grows like c^k, so the
# k^(-k/2) decay in the bound cannot be improved beyond the constant.
for n in (20, 100):
    v = sympoly.alternating_vector(n)
    ratios = [sympoly.tightness_ratio(v, k) for k in (2, 4, 8)]
    print(f"alternating n={n}: ratio at k=2,4,8 =", [f"{r:.3f}" for r in ratios])
