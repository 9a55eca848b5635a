"""Hash families for combinatorial rectangles and min-wise events.

Run: python3 demos/gmr_minwise.py
"""

from symtail import gmr, minwise

params = gmr.GmrParams(n=64, m=256, delta=0.1)
print(params.table())

h = gmr.sample_hash(params, master_seed=3)
print("first hash values:", [h(i) for i in range(8)])

battery = gmr.rectangle_battery(64, 256, per_class=2, seed=0)
reps = gmr.rectangle_battery_test(params, [r for _, r in battery], 20_000)
for (shape, rect), rep in zip(battery, reps):
    print(f"{shape:>6}: exact {float(gmr.rectangle_probability_exact(rect)):.4f} "
          f"estimate {rep.estimate:.4f} -> {rep.verdict}")

fam = minwise.make_family("gmr", 8, 16, seed=0, delta=0.1)
q = minwise.MinwiseQuery(range(8), (5, 1), 16)
rep = minwise.minwise_test(fam, q, 50_000)
print(f"P[5 then 1 are the two smallest] ~ {rep.estimate:.4f}, "
      f"uniform {rep.reference:.4f} -> {rep.verdict}")
