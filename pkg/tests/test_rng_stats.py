import math

import numpy as np
import pytest

from symtail import rng
from symtail.stats import wilson_halfwidth, wilson_interval, z_value


def test_mix64_matches_reference_value():
    # first SplitMix64 output for state 0 after one increment
    assert rng.mix64_int(rng.GOLDEN) == 0xE220A8397B1DCDAF


def test_numpy_and_int_mixers_agree():
    z = np.array([0, 1, 12345, rng.MASK64], dtype=np.uint64)
    assert [int(v) for v in rng._mix64(z)] == [rng.mix64_int(int(v)) for v in z]


def test_words_are_row_local():
    a = rng.words(7, [0, 1, 2, 3], 5)
    b = rng.words(7, [2], 5)
    assert (a[2] == b[0]).all()


def test_derive_key_separates_labels():
    keys = {rng.derive_key(0, "a"), rng.derive_key(0, "b"), rng.derive_key(1, "a"),
            rng.derive_key(0, "a", 1), rng.derive_key(0, 1 << 70)}
    assert len(keys) == 5


def test_uniform01_range_and_mean():
    u = rng.uniform01(3, np.arange(20000), 2)
    assert u.min() >= 0 and u.max() < 1
    assert abs(u.mean() - 0.5) < 0.01


def test_symbols_power_of_two_and_general():
    s = rng.symbols(1, np.arange(40000), 1, 8)
    counts = np.bincount(s.ravel(), minlength=8)
    assert counts.min() > 4700
    s = rng.symbols(1, np.arange(30000), 1, 3)
    assert set(np.unique(s)) == {0, 1, 2}


def test_z_value():
    assert z_value(0.99) == pytest.approx(2.5758293, rel=1e-6)


def test_wilson_reference_value():
    # textbook: 5 of 20 at 95% -> (0.1119, 0.4687)
    lo, hi = wilson_interval(5, 20, 0.95)
    assert lo == pytest.approx(0.1119, abs=1e-4)
    assert hi == pytest.approx(0.4687, abs=1e-4)


def test_wilson_edges():
    assert wilson_interval(0, 100)[0] == 0.0
    assert wilson_interval(100, 100)[1] == 1.0
    lo, hi = wilson_interval(0, 100)
    z = z_value()
    assert hi == pytest.approx(z * z / (100 + z * z))
    assert wilson_interval(0, 0) == (0.0, 1.0)
    with pytest.raises(ValueError):
        wilson_interval(5, 3)


def test_wilson_halfwidth_shrinks():
    assert wilson_halfwidth(0.1, 10_000) < wilson_halfwidth(0.1, 100)
