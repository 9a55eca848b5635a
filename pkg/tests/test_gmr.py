import itertools
import math
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from symtail import gmr
from symtail.errors import ConfigurationError, DomainError
from symtail.gmr import (GmrParams, Rectangle, derive_schedule, evaluate,
                         hybrid_diagnostic, rectangle_probability_exact,
                         rectangle_test, sample_hash, seed_length)
from symtail.kwise import support_array


def test_worked_schedule():
    p = derive_schedule(1024, 256, 0.1, 4)
    assert 4 * math.log(10) == pytest.approx(9.2103, rel=1e-4)
    assert p.m0 == 16 and p.T == 1
    assert p.delta_prime == 0.1
    assert [lv.m for lv in p.levels] == [16, 256]
    assert p.levels[0].k == 11                       # ceil(9.21) = 10 -> odd 11
    assert p.levels[1].k == max(math.ceil(4 * math.log(10) / math.log(256)), 2) == 2
    assert [lv.bits for lv in p.levels] == [10, 14]
    assert seed_length(p)["bits"] == 11 * 10 + 2 * 14


def test_base_case_only():
    p = derive_schedule(1024, 16, 0.1)
    assert p.T == 0 and p.delta_prime == 0.1
    assert seed_length(p)["bits"] == 110             # k0 = 11, b0 = 10


@pytest.mark.parametrize("n", [1, 7, 64, 1000, 1 << 12])
@pytest.mark.parametrize("m", [2, 16, 256, 1 << 16])
@pytest.mark.parametrize("delta", [0.2, 0.1, 0.01])
def test_schedule_invariants(n, m, delta):
    C = 4
    try:
        p = derive_schedule(n, m, delta, C)
    except ConfigurationError as exc:
        assert "field" in str(exc)                   # only field-size limits refuse
        return
    assert p.m0 & (p.m0 - 1) == 0 and p.m0 >= C * math.log(1 / delta)
    assert p.m0 // 2 < max(2, C * math.log(1 / delta))
    ms = [lv.m for lv in p.levels]
    assert all(b == a * a for a, b in zip(ms, ms[1:]))
    assert ms[-1] >= m and (p.T == 0 or ms[-2] < m)
    if m > p.m0:
        assert p.T == math.ceil(math.log2(math.log(m) / math.log(p.m0)))
    dp = delta / p.T if p.T else delta
    assert p.delta_prime == dp
    k0 = p.levels[0].k
    assert k0 % 2 == 1 and k0 >= C * math.log(1 / dp)
    for lv in p.levels[1:]:
        assert lv.k == max(math.ceil(C * math.log(1 / dp) / math.log(lv.m)), 2)
        assert 2 ** lv.bits >= max(lv.domain, lv.m)


def test_schedule_refusals():
    with pytest.raises(ConfigurationError):
        derive_schedule(10, 100, 0.1)
    with pytest.raises(ConfigurationError):
        derive_schedule(10, 16, 1.5)
    with pytest.raises(ConfigurationError):
        derive_schedule(1 << 20, 1 << 16, 0.1)       # needs a field beyond 2^16


def test_bits_grow_logarithmically_in_n():
    a = seed_length(derive_schedule(1024, 256, 0.1))["bits"]
    b = seed_length(derive_schedule(2048, 256, 0.1))["bits"]
    assert b - a == 11 + 2                          # one extra bit per level


def test_hypothesis_flags_reported():
    flags = derive_schedule(1024, 256, 0.1).hypothesis_flags
    assert len(flags) == 1
    assert flags[0]["required"] == pytest.approx(math.log(10) ** 4)
    assert flags[0]["holds"] is False


def test_level_samplers_are_exactly_k_wise():
    p = derive_schedule(4, 16, 0.5, 1)
    for t in range(p.T + 1):
        spec = p.level_spec(t)
        if spec.support_size > 1 << 16:
            continue
        rows = support_array(spec)
        for cols in itertools.combinations(range(min(spec.n, 5)), spec.k):
            c = Counter(map(tuple, rows[:, cols].tolist()))
            assert len(c) == spec.size ** spec.k
            assert len(set(c.values())) == 1


def test_hash_is_lazy_and_deterministic():
    p = derive_schedule(64, 256, 0.1)
    h = sample_hash(p, 5, index=11)
    tab = h.table()
    assert [h(i) for i in (63, 0, 17)] == [tab[63], tab[0], tab[17]]
    assert (evaluate(p, 5, [11])[0] == tab).all()
    assert (sample_hash(p, 5, index=11).table() == tab).all()
    assert tab.min() >= 0 and tab.max() < 256


def test_composition_by_hand():
    p = derive_schedule(8, 256, 0.1)
    idx = np.array([3])
    g0 = gmr._level_values(p, 0, 9, idx, np.arange(8)[None, :], False)
    cells = g0 * 8 + np.arange(8)
    g1 = gmr._level_values(p, 1, 9, idx, cells, False)
    assert (evaluate(p, 9, idx) == g1 % 256).all()


def test_t0_is_plain_k_wise_function():
    p = derive_schedule(20, 8, 0.1)
    from symtail.kwise import KWiseSpec
    assert p.T == 0
    g = evaluate(p, 1, np.arange(10))
    assert g.max() < 8


def test_marginals_uniform_chi_square():
    p = derive_schedule(16, 256, 0.1)
    g = evaluate(p, 2, np.arange(100_000), coords=[5])[:, 0]
    counts = np.bincount(g, minlength=256)
    expected = len(g) / 256
    chi2 = ((counts - expected) ** 2 / expected).sum()
    # 255 d.o.f.: P[chi2 > 345] < 0.001
    assert chi2 < 345


def test_rectangle_probability():
    assert rectangle_probability_exact(Rectangle.full(4, 3)) == 1
    assert rectangle_probability_exact(Rectangle(4, ([0], [], [1, 2]))) == 0
    r = Rectangle(4, ([0, 1], [2], [0, 1, 3]))
    assert rectangle_probability_exact(r) == Fraction(6, 64) == Fraction(3, 32)
    with pytest.raises(DomainError):
        Rectangle(4, ([5],))


def test_full_rectangle_always_accepts():
    p = derive_schedule(16, 64, 0.1)
    rep = rectangle_test(p, Rectangle.full(64, 16), 2000)
    assert rep.estimate == 1.0 and rep.extra["abs_error"] == 0 and rep.passed


def tail_rectangle(p, seed=0):
    """Each coordinate rejects r symbols with sum of q_i near C ln(1/delta)."""
    rs = np.random.default_rng(seed)
    r = round(p.C * math.log(1 / p.delta) * p.m / p.n)
    sets = [sorted(rs.choice(p.m, p.m - r, replace=False).tolist()) for _ in range(p.n)]
    return Rectangle(p.m, tuple(sets))


def test_tail_rectangle_within_delta():
    p = derive_schedule(64, 256, 0.1)
    rect = tail_rectangle(p)
    assert rect.q_sum == pytest.approx(p.C * math.log(10), rel=0.02)
    rep = rectangle_test(p, rect, 20_000, master_seed=3)
    assert rep.passed


def test_single_level_rectangle():
    p = derive_schedule(32, 16, 0.1)
    assert p.T == 0
    rs = np.random.default_rng(1)
    rect = Rectangle(16, tuple(sorted(rs.choice(16, 14, replace=False).tolist())
                               for _ in range(32)))
    rep = rectangle_test(p, rect, 20_000)
    # exact k-wise base level: error at most the exp(-Omega(k)) envelope + margin
    assert rep.extra["abs_error"] <= math.exp(-p.levels[0].k / 4) + 0.01
    assert rep.passed


def test_undersized_budget_warns():
    p = derive_schedule(8, 16, 0.01)
    rep = rectangle_test(p, Rectangle.full(16, 8), 100)
    assert rep.warnings


def test_battery_shapes():
    battery = gmr.rectangle_battery(64, 256, 20, seed=0)
    assert len(battery) == 60
    for shape, rect in battery:
        ps = [float(x) for x in rect.p]
        if shape == "sparse":
            assert min(ps) < 256 ** -0.1


def test_battery_shares_trials_with_single_tests():
    p = derive_schedule(16, 64, 0.1)
    rects = [r for _, r in gmr.rectangle_battery(16, 64, 2, seed=4)]
    reps = gmr.rectangle_battery_test(p, rects, 3000, master_seed=1)
    for rect, rep in zip(rects, reps):
        assert rectangle_test(p, rect, 3000, master_seed=1).successes == rep.successes


def test_hybrids():
    p = derive_schedule(16, 256, 0.1)
    rect = gmr.rectangle_battery(16, 256, 1, seed=2)[2][1]
    rep = hybrid_diagnostic(p, rect, 5000, master_seed=1)
    est = rep.extra["hybrid_estimates"]
    assert len(est) == p.T + 2
    # hybrid 0 is the family itself
    assert rep.extra["hybrid_counts"][0] == rectangle_test(p, rect, 5000, 1).successes
    assert rep.extra["triangle_ok"]
    assert rep.passed


def test_uniform_hybrid_is_unbiased():
    p = derive_schedule(4, 16, 0.1)
    rect = Rectangle(16, ([0, 1, 2, 3],) * 4)
    counts = gmr.battery_counts(p, [rect], 50_000, 3, hybrids=(p.T + 1,))
    est = counts[0, 0] / 50_000
    assert abs(est - 1 / 256) < 0.002


def test_hybrid_level_validation():
    p = derive_schedule(4, 16, 0.1)
    with pytest.raises(DomainError):
        evaluate(p, 0, [0], hybrid=p.T + 2)
    with pytest.raises(DomainError):
        hybrid_diagnostic(p, Rectangle.full(16, 4), 10, level=p.T + 1)


def test_load_rectangles():
    rects = gmr.load_rectangles([[[0, 1], [2]], [[3], [0, 1, 2, 3]]], 4, 2)
    assert len(rects) == 2
    single = gmr.load_rectangles([[0, 1], [2]], 4)
    assert len(single) == 1 and single[0].n == 2
    with pytest.raises(ConfigurationError):
        gmr.load_rectangles([[[0]]], 4, 2)


def test_parallel_matches_serial():
    p = derive_schedule(16, 64, 0.1)
    rects = [r for _, r in gmr.rectangle_battery(16, 64, 1, seed=4)]
    a = gmr.battery_counts(p, rects, 20_000, 5, (0, 1), workers=1)
    b = gmr.battery_counts(p, rects, 20_000, 5, (0, 1), workers=3)
    assert (a == b).all()
