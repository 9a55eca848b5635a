import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from symtail.dists import FiniteDist, scaled_pm1
from symtail.errors import ConfigurationError, DomainError
from symtail.kwise import KWiseSpec, support_array
from symtail.products import (BoundedVarSpec, JointDistribution, _crt,
                              bonferroni_truncation, decay_slope,
                              exact_product_expectation, log_error_decreasing,
                              parity_distribution, product_error_ladder,
                              product_expectation_enumerated, taylor_truncation)

HALF = Fraction(1, 2)


def two_point(mu, d):
    return FiniteDist((mu - d, mu + d), (HALF, HALF))


def brute_expectation(spec, sampler):
    """Average of prod X_i over explicitly enumerated support rows."""
    size = sampler.size
    tables = [c.quantile_table(size) for c in spec.coords]
    total = Fraction(0)
    rows = support_array(sampler)
    if sampler.alphabet == "pm1":
        rows = (rows + 1) // 2
    for row in rows:
        total += math.prod((c.values[tab[s]] for c, tab, s in
                            zip(spec.coords, tables, row)), start=Fraction(1))
    return total / len(rows)


# --- specs and joint laws ------------------------------------------------------------


def test_spec_validation_and_moments():
    spec = BoundedVarSpec((two_point(Fraction(9, 10), Fraction(1, 20)),) * 3)
    assert spec.means == (Fraction(9, 10),) * 3
    assert spec.sigma2 == 3 * Fraction(1, 400)
    with pytest.raises(DomainError):
        BoundedVarSpec((FiniteDist((2,), (1,)),))


def test_spec_json_round_trip():
    spec = BoundedVarSpec((two_point(HALF, Fraction(1, 4)), scaled_pm1(1)))
    assert BoundedVarSpec.from_json(spec.to_json()) == spec


def test_parity_counterexample():
    d = parity_distribution(4)
    assert exact_product_expectation(None, d) == 1
    assert d.means == (0, 0, 0, 0)
    assert d.is_kwise(3) and not d.is_kwise(4)
    assert d.independence_degree() == 3


def test_joint_distribution_validation():
    with pytest.raises(ConfigurationError):
        JointDistribution(((1, 2), (3,)), (HALF, HALF))


# --- exact expectations ---------------------------------------------------------------


def test_constants_give_product():
    spec = BoundedVarSpec(tuple(FiniteDist((c,), (1,)) for c in
                                (HALF, Fraction(-1, 3), Fraction(3, 4), 1)))
    want = HALF * Fraction(-1, 3) * Fraction(3, 4)
    for sampler in (None, spec.sampler(2), spec.sampler(3)):
        assert exact_product_expectation(spec, sampler) == want
        if sampler is not None:
            assert product_expectation_enumerated(spec, sampler) == want


def test_symmetric_coordinates_fully_independent():
    spec = BoundedVarSpec((scaled_pm1(Fraction(1, 10)),) * 4)
    sampler = KWiseSpec(n=4, k=4, alphabet=2)
    assert product_expectation_enumerated(spec, sampler) == 0


@pytest.mark.parametrize("wise", [2, 3, 4])
def test_crt_sum_matches_direct_enumeration(wise):
    spec = BoundedVarSpec((two_point(Fraction(9, 10), Fraction(1, 20)),
                           FiniteDist((Fraction(-1, 3), 0, 1), (Fraction(1, 4), HALF, Fraction(1, 4))),
                           two_point(Fraction(-7, 10), Fraction(3, 10)),
                           two_point(HALF, Fraction(1, 7)),
                           scaled_pm1(Fraction(5, 6))))
    sampler = spec.sampler(wise, seed=1)
    assert product_expectation_enumerated(spec, sampler) == brute_expectation(spec, sampler)


def test_full_independence_shortcut_agrees_with_enumeration():
    spec = BoundedVarSpec((FiniteDist((HALF, Fraction(-1, 4)), (Fraction(1, 4), Fraction(3, 4))),) * 4)
    sampler = spec.sampler(4)
    assert product_expectation_enumerated(spec, sampler) == spec.product_of_means
    assert exact_product_expectation(spec, sampler) == spec.product_of_means


def test_relabeling_invariance():
    coords = [two_point(Fraction(9, 10), Fraction(1, 20)), two_point(HALF, Fraction(1, 4)),
              two_point(Fraction(-3, 5), Fraction(1, 5)), scaled_pm1(Fraction(1, 2)),
              two_point(Fraction(4, 5), Fraction(1, 10))]
    base = exact_product_expectation(BoundedVarSpec(tuple(coords)), None)
    for perm in itertools.islice(itertools.permutations(coords), 0, 120, 17):
        assert exact_product_expectation(BoundedVarSpec(perm), None) == base


def test_crt_signed_reconstruction():
    primes = [101, 103]
    for x in (-5000, -1, 0, 1, 5000):
        assert _crt([x % p for p in primes], primes) == x


# --- truncations ----------------------------------------------------------------------------


def test_taylor_examples():
    r = taylor_truncation([HALF, HALF], [0, 0], 3)
    assert r.truncated == Fraction(1, 4) and r.residual == 0
    r = taylor_truncation([HALF, HALF], [Fraction(1, 5), Fraction(-1, 5)], 1)
    assert r.truncated == Fraction(1, 4)
    assert r.full == Fraction(6, 25)
    assert r.residual == Fraction(6, 25) - Fraction(1, 4)


def test_taylor_full_order_is_exact_product():
    mu = [HALF, Fraction(-2, 3), Fraction(3, 4)]
    z = [Fraction(1, 5), Fraction(1, 7), Fraction(-1, 2)]
    r = taylor_truncation(mu, z, 3)
    assert r.truncated == math.prod((m * (1 + x) for m, x in zip(mu, z)), start=Fraction(1))


def test_taylor_zero_mean_names_coordinate():
    with pytest.raises(DomainError, match="coordinate 1"):
        taylor_truncation([1, 0], [0, 0], 1)


def test_taylor_at_n_equals_independent_expectation():
    coords = [two_point(Fraction(9, 10), Fraction(1, 20)), two_point(HALF, Fraction(1, 4)),
              FiniteDist((Fraction(-3, 5), Fraction(-1, 5), 0),
                         (Fraction(1, 4), HALF, Fraction(1, 4)))]
    spec = BoundedVarSpec(tuple(coords))
    mu = spec.means
    # average the order-n expansion over every joint outcome of the product law
    avg = Fraction(0)
    for combo in itertools.product(*(list(zip(c.values, c.probs)) for c in coords)):
        p = math.prod((pr for _, pr in combo), start=Fraction(1))
        z = [(v - m) / m for (v, _), m in zip(combo, mu)]
        avg += p * taylor_truncation(mu, z, 3).truncated
    sampler = KWiseSpec(n=3, k=3, alphabet=4)
    assert avg == product_expectation_enumerated(spec, sampler) == spec.product_of_means


def test_bonferroni_examples():
    parts = [bonferroni_truncation([HALF, HALF], k).truncated for k in range(3)]
    assert parts == [1, 0, Fraction(1, 4)]
    assert all(bonferroni_truncation([0, 0, 0], k).truncated == 1 for k in range(4))
    parts = [bonferroni_truncation([1, 1, 1], k).truncated for k in range(4)]
    assert parts == [1, -2, 1, 0]
    assert bonferroni_truncation([1, 1, 1], 0).full == 0
    with pytest.raises(DomainError):
        bonferroni_truncation([Fraction(3, 2)], 1)


@settings(max_examples=300)
@given(st.lists(st.fractions(0, 1, max_denominator=30), min_size=0, max_size=20),
       st.integers(0, 21))
def test_bonferroni_sandwich(y, k):
    assert bonferroni_truncation(y, k).sandwich_holds


# --- ladder ------------------------------------------------------------------------------------


def test_ladder_zero_sigma():
    spec = BoundedVarSpec(tuple(FiniteDist((c,), (1,)) for c in (HALF, Fraction(3, 4), 1, HALF, 1)))
    rep = product_error_ladder(spec, [1, 2, 3])
    assert all(r["error"] == 0 for r in rep.extra["ladder"])
    assert rep.passed


def test_ladder_worked_example():
    spec = BoundedVarSpec((two_point(Fraction(9, 10), Fraction(1, 20)),) * 8)
    rep = product_error_ladder(spec, [1, 2, 3])
    errs = [Fraction(r["error_exact"]) for r in rep.extra["ladder"]]
    assert errs[2] < errs[0]
    # the first 8 field points form a subspace, so the low bits have even
    # parity for every k < 8 and the top-order term stays put
    assert errs[0] == errs[1] == Fraction(1, 20) ** 8
    assert rep.extra["log_error_decreasing"]
    assert rep.passed


def test_ladder_full_independence_zero():
    spec = BoundedVarSpec((two_point(Fraction(9, 10), Fraction(1, 20)),) * 3)
    rep = product_error_ladder(spec, [1, 2])
    assert all(r["fully_independent"] and r["error"] == 0 for r in rep.extra["ladder"])


def test_decay_helpers():
    assert log_error_decreasing([Fraction(1, 10), Fraction(1, 100), 0])
    assert log_error_decreasing([Fraction(1, 10), Fraction(1, 10), 0])
    assert not log_error_decreasing([Fraction(1, 10), Fraction(1, 10)])
    assert not log_error_decreasing([Fraction(1, 100), Fraction(1, 10)])
    assert log_error_decreasing([0, 0, 0])
    assert decay_slope([1, 2, 3], [1e-2, 1e-4, 1e-6]) == pytest.approx(-2 * math.log(10))
    assert decay_slope([1, 2], [0, 1e-3]) is None
