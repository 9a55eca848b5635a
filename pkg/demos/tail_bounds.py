"""Tail probabilities of |S_k| under full and limited independence.

Run: python3 demos/tail_bounds.py
"""

from fractions import Fraction

from symtail import tailbounds
from symtail.dists import scaled_pm1

# n is not a power of two: with n = 2^b the evaluation points fill the whole
# field and the low output bits satisfy extra linear constraints.
n, sigma = 30, 0.01
coord = scaled_pm1(Fraction(sigma / n ** 0.5))
dists = [coord] * n

for k, t in [(2, 1.5), (3, 2.0)]:
    thr = tailbounds.tail_thresholds(sigma, t, k)
    print(f"k={k} t={t}: threshold {thr.thm15_threshold:.4g}, bound {thr.thm15_prob:.4g}, "
          f"precondition {thr.thm15_precondition}")
    for independence in ("full", "kwise"):
        q = tailbounds.TailQuery(k, t, 20_000, independence, seed=1)
        rep = tailbounds.mc_tail_experiment(q, dists)
        print(f"   {independence:>5}: P ~ {rep.estimate:.4g} "
              f"[{rep.ci_low:.3g}, {rep.ci_high:.3g}] -> {rep.verdict}")

# Exact second moments are the elementary symmetric polynomials of the variances.
m = tailbounds.exact_second_moment([1, 1, 1, 1], 2)
print("E[S_2^2] for four unit variances:", m.exact, "<=", m.bound)

# The bounds above are far out in the tail. Sweeping the threshold in units of
# the typical size sqrt(E[S_k^2]) compares the two laws where events happen.
k = 2
typical = float(tailbounds.exact_second_moment([coord.variance] * n, k).exact) ** 0.5
print(f"k={k}, typical |S_k| = {typical:.3g}")
for mult in (1, 2, 4, 8):
    row = []
    for independence in ("full", "kwise"):
        q = tailbounds.TailQuery(k, 2.0, 20_000, independence, seed=2,
                                 threshold=mult * typical)
        row.append(tailbounds.mc_tail_experiment(q, dists).estimate)
    print(f"   P[|S_k| >= {mult} x typical]: full {row[0]:.4f}  kwise {row[1]:.4f}")
