import itertools
import math
import random
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from symtail.errors import DegeneratePivotError, DomainError, InputError, ModeError
from symtail.sympoly import (
    SIX_E, alternating_vector, elementary_profile, float_profiles,
    maclaurin_check, minimal_theorem14_constant, power_sum_e2, theorem12_check,
    theorem14_check, tightness_ratio, to_fraction)


def brute_profile(a):
    """S_k by summing over all subsets (independent of the DP)."""
    n = len(a)
    return [sum((math.prod(c, start=Fraction(1)) for c in itertools.combinations(a, k)),
                Fraction(0)) for k in range(n + 1)]


rationals = st.fractions(min_value=-5, max_value=5, max_denominator=50)
vectors = st.lists(rationals, min_size=0, max_size=9)


# --- elementary_profile ------------------------------------------------------------


def test_two_element_expansion():
    assert elementary_profile([2, 3]).values == (1, 5, 6)


def test_all_ones_gives_binomials():
    assert elementary_profile([1, 1, 1, 1]).values == (1, 4, 6, 4, 1)


def test_alternating_four_matches_subset_sum():
    a = [-1, 1, -1, 1]
    assert list(elementary_profile(a).values) == brute_profile(a) == [1, 0, -2, 0, 1]


def test_empty_vector():
    prof = elementary_profile([])
    assert prof.values == (1,)
    assert prof.n == 0


def test_rational_strings_accepted():
    prof = elementary_profile(["1/2", "-1/3"])
    assert prof.values == (1, Fraction(1, 6), Fraction(-1, 6))


def test_non_finite_rejected():
    with pytest.raises(InputError):
        elementary_profile([1.0, float("nan")])
    with pytest.raises(InputError):
        elementary_profile([math.inf], mode="float")


def test_irrational_literal_rejected_in_exact_mode():
    with pytest.raises(ModeError):
        elementary_profile(["sqrt(2)"])
    with pytest.raises(ModeError):
        elementary_profile([1], mode="symbolic")


def test_bool_is_not_a_number():
    with pytest.raises(ModeError):
        to_fraction(True)


@given(vectors)
def test_dp_matches_subset_enumeration(a):
    assert list(elementary_profile(a).values) == brute_profile(a)


@given(vectors)
def test_s0_is_one_in_both_modes(a):
    assert elementary_profile(a).values[0] == 1
    assert elementary_profile([float(x) for x in a], "float").values[0] == 1.0


@given(vectors, st.randoms())
def test_permutation_invariance(a, rnd):
    b = list(a)
    rnd.shuffle(b)
    assert elementary_profile(a).values == elementary_profile(b).values


@given(vectors, rationals)
def test_homogeneity_exact(a, c):
    pa = elementary_profile(a)
    pc = elementary_profile([c * x for x in a])
    assert all(pc[k] == c ** k * pa[k] for k in range(len(a) + 1))


@given(st.lists(st.floats(-3, 3), max_size=20),
       st.floats(0.5, 2.0), st.sampled_from([-1, 1]))
def test_homogeneity_float(a, c, sign):
    c *= sign
    pa = elementary_profile(a, "float")
    pc = elementary_profile([c * x for x in a], "float")
    if pa.condition_flag or pc.condition_flag:
        return
    for k in range(len(a) + 1):
        want = c ** k * pa[k]
        assert abs(pc[k] - want) <= 1e-9 * max(abs(want), 1e-300) + 1e-300


def test_generating_function_identity():
    rs = np.random.default_rng(11)
    for _ in range(100):
        n = int(rs.integers(0, 31))
        a = rs.standard_normal(n)
        prof = elementary_profile(a, "float")
        for x in rs.uniform(-2, 2, 10):
            direct = math.prod(1 + ai * x for ai in a)
            terms = [s * x ** k for k, s in enumerate(prof.values)]
            assert abs(direct - sum(terms)) <= 1e-9 * sum(abs(t) for t in terms)


@given(vectors, rationals)
def test_generating_function_exact(a, x):
    prof = elementary_profile(a)
    assert math.prod((1 + ai * x for ai in a), start=Fraction(1)) == \
        sum(s * x ** k for k, s in enumerate(prof.values))


def test_float_exact_agreement_on_rationals():
    rs = np.random.default_rng(5)
    for _ in range(200):
        n = int(rs.integers(1, 25))
        a = [Fraction(int(v), 64) for v in rs.integers(-128, 129, n)]
        ex = elementary_profile(a)
        fl = elementary_profile([float(x) for x in a], "float")
        if fl.condition_flag:
            continue
        for k in range(n + 1):
            e = float(ex[k])
            assert abs(fl[k] - e) <= 1e-9 * abs(e) + 1e-300


def test_cancellation_flag_set_on_huge_intermediates():
    # (1 + 1e8 x)(1 - 1e8 x) has S_1 = 0 after a 1e8 intermediate
    prof = elementary_profile([1e8, -1e8], "float")
    assert prof.condition_flag
    assert not elementary_profile([1.0, 2.0], "float").condition_flag


def test_float_profiles_batched_shape():
    vals, peaks, flags = float_profiles(np.ones((3, 4)))
    assert vals.shape == (3, 5) and peaks.shape == flags.shape == (3, 5)
    assert vals[0].tolist() == [1, 4, 6, 4, 1]


# --- power sums ---------------------------------------------------------------------


def test_power_sum_examples():
    assert power_sum_e2([3, 4]) == 25
    assert power_sum_e2([]) == 0
    p = elementary_profile([2, 3])
    assert power_sum_e2([2, 3]) == 13 == p[1] ** 2 - 2 * p[2]


@given(vectors)
def test_newton_identity_exact(a):
    p = elementary_profile(a)
    s2 = p.get(2)
    assert power_sum_e2(a) == p.get(1) ** 2 - 2 * s2


# --- 6e bound -----------------------------------------------------------------------


def test_theorem12_zero_vector_equality():
    rep = theorem12_check([0, 0, 0])
    assert rep.holds
    assert all(r.lhs == 0 and r.rhs == 0 and r.slack == 0 for r in rep.records)


def test_theorem12_ones_pair():
    rep = theorem12_check([1, 1])
    r2 = rep.records[1]
    assert r2.lhs == 1
    assert r2.rhs == pytest.approx((SIX_E * math.sqrt(5) / math.sqrt(2)) ** 2)
    assert r2.rhs == pytest.approx(665.0148, rel=1e-6)
    assert rep.verdict == "holds"


def test_theorem12_alternating_hundred():
    a = alternating_vector(100)
    rep = theorem12_check(a)
    assert rep.holds
    r10 = rep.records[9]
    assert r10.rhs == pytest.approx((SIX_E * math.sqrt(50) / math.sqrt(10)) ** 10)
    assert r10.lhs == abs(float(brute_alt_s10()))


def brute_alt_s10():
    # S_10 of 50 (+1)'s and 50 (-1)'s: sum_j (-1)^j C(50, j) C(50, 10 - j)
    return sum((-1) ** j * math.comb(50, j) * math.comb(50, 10 - j) for j in range(11))


@settings(max_examples=200)
@given(st.lists(st.fractions(-10, 10, max_denominator=1000), min_size=1, max_size=30))
def test_theorem12_holds_on_random_rationals(a):
    assert theorem12_check(a).holds


# --- ratio-hypothesis bound --------------------------------------------------------------------


def test_theorem14_k0_reduces_to_theorem12():
    a = [Fraction(1, 2), -2, 3, Fraction(1, 7)]
    p = elementary_profile(a)
    C = math.sqrt(float(p[1] ** 2 + abs(p[2])))
    r14 = theorem14_check(a, 0, C)
    r12 = theorem12_check(a)
    assert r14.hypotheses_hold
    assert [(r.lhs, r.rhs) for r in r14.records] == \
        [(r.lhs, pytest.approx(r12.records[i].rhs)) for i, r in enumerate(r14.records)]


def test_theorem14_ones_k1_minimal_constant():
    prof = elementary_profile([1, 1, 1, 1])
    C = minimal_theorem14_constant(prof, 1)
    # ratios: 2*S2/S1 = 3, C(3,1)*S3/S1 = 3 -> C = max(3, sqrt 3) = 3
    assert C == 3
    rep = theorem14_check(prof, 1, C)
    assert rep.hypotheses_hold and rep.holds
    assert [r.k for r in rep.records] == [1, 2, 3]
    assert [r.lhs for r in rep.records] == [3, 3, 1]


def test_theorem14_hypothesis_violation_is_a_report():
    rep = theorem14_check([1, 1, 1, 1], 1, 1.0)
    assert not rep.hypotheses_hold
    assert rep.verdict == "hypothesis-violated"


def test_theorem14_exact_zero_pivot_reports():
    rep = theorem14_check([1, -1], 1, 1.0)
    assert rep.verdict == "hypothesis-violated"
    assert rep.hypotheses["pivot_nonzero"] is False


def test_theorem14_float_zero_pivot_raises():
    with pytest.raises(DegeneratePivotError, match="exact mode"):
        theorem14_check([1.0, -1.0, 0.0], 1, 1.0, mode="float")


def test_theorem14_gaussian_sweep():
    rs = np.random.default_rng(3)
    checked = 0
    for _ in range(10_000 // 20):
        a = rs.standard_normal(20)
        prof = elementary_profile(a.tolist())
        C = minimal_theorem14_constant(prof, 3)
        rep = theorem14_check(prof, 3, C)
        assert rep.hypotheses_hold
        assert rep.holds
        checked += 1
        rep = theorem14_check(prof, 3, 1.0)
        if rep.hypotheses_hold:
            assert rep.holds
    assert checked == 500


# --- Maclaurin --------------------------------------------------------------------------


def test_maclaurin_examples():
    rep = maclaurin_check([1, 1, 1, 1])
    assert rep.records[1].lhs == 6
    assert rep.records[1].rhs == pytest.approx((math.e / 2) ** 2 * 16)
    assert rep.holds
    rep = maclaurin_check([Fraction(1, 10)] * 10)
    assert rep.records[2].lhs == pytest.approx(0.12)
    assert rep.records[2].rhs == pytest.approx((math.e / 3) ** 3)
    assert all(r.lhs == r.rhs == 0 for r in maclaurin_check([0, 0]).records)


def test_maclaurin_rejects_negative():
    with pytest.raises(DomainError):
        maclaurin_check([1, -1])


@given(st.lists(st.fractions(0, 10, max_denominator=100), min_size=1, max_size=15))
def test_maclaurin_holds(a):
    assert maclaurin_check(a).holds


# --- alternating vector ----------------------------------------------------------------


def test_alternating_vector():
    assert alternating_vector(4) == (-1, 1, -1, 1)
    assert alternating_vector(1) == (-1,)
    p = elementary_profile(alternating_vector(100))
    assert abs(p[1]) <= 1 and abs(p[2]) <= 101
    with pytest.raises(DomainError):
        alternating_vector(0)


def test_tightness_ratio_within_exponential():
    r = tightness_ratio(alternating_vector(100), 10)
    assert (6 * math.e) ** -10 <= r <= (6 * math.e) ** 10
    assert r == pytest.approx(abs(brute_alt_s10()) * 10 ** 5 / 50 ** 5)


def test_report_to_dict():
    d = theorem12_check([1, 2]).to_dict()
    assert d["verdict"] == "holds" and len(d["records"]) == 2


def test_theorem14_float_relative_pivot_raises():
    # S_1 = 1e-4 is far below 1e-9 * |S_2| = 1e3
    with pytest.raises(DegeneratePivotError):
        theorem14_check([1e6, -1e6 + 1e-4], 1, 1.0, mode="float")
