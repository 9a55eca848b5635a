"""The translated (2k+2)-wise sampler that contains the all-ones vector.

The all-ones pattern is hit with probability 2^-rank, where rank is the
GF(2) rank of the map from seed bits to output low bits. This rank is far
below the number of seed bits, so the pattern is much more likely than
one over the support size.

Run: python3 demos/lower_bound.py
"""

from symtail import kwise, tailbounds

for n, k in [(4, 1), (8, 1), (16, 1)]:
    spec, _ = kwise.lower_bound_sampler(n, k)
    rep = tailbounds.lower_bound_experiment(n, k, 2 * k + 2)
    print(f"n={n} k={k}: support {spec.support_size}, rank {kwise.low_bit_rank(spec)}, "
          f"P[all ones] = {rep.exact['all_ones']} "
          f"(support floor {rep.exact['reference']})")
    print(f"   mean |S_l| = {rep.exact['mean_abs']}, "
          f"exceeds the Cauchy-Schwarz bound: {rep.extra['exceeds_cauchy_schwarz']}")
