"""Finite-support coordinate distributions with exact rational weights."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, DomainError
from .sympoly import to_fraction


@dataclass(frozen=True)
class FiniteDist:
    """A random variable taking ``values[j]`` with probability ``probs[j]``."""

    values: tuple
    probs: tuple

    def __post_init__(self):
        vals = tuple(to_fraction(v) for v in self.values)
        probs = tuple(to_fraction(p) for p in self.probs)
        if len(vals) != len(probs) or not vals:
            raise ConfigurationError("values and probs must be non-empty and "
                                     "of equal length")
        if any(p < 0 for p in probs) or sum(probs) != 1:
            raise ConfigurationError(f"probabilities must be >= 0 and sum to 1, "
                                     f"got {probs}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def from_json(cls, items):
        """``[{"value": "p/q", "prob": "p/q"}, ...]``"""
        try:
            return cls(tuple(it["value"] for it in items),
                       tuple(it["prob"] for it in items))
        except (KeyError, TypeError):
            raise ConfigurationError(
                "coordinate must be a list of {value, prob} objects") from None

    def to_json(self):
        return [{"value": str(v), "prob": str(p)}
                for v, p in zip(self.values, self.probs)]

    @property
    def mean(self):
        return sum((v * p for v, p in zip(self.values, self.probs)), Fraction(0))

    @property
    def variance(self):
        mu = self.mean
        return sum(((v - mu) ** 2 * p for v, p in zip(self.values, self.probs)),
                   Fraction(0))

    @property
    def resolution(self):
        """Least common denominator of the probabilities."""
        return math.lcm(*(p.denominator for p in self.probs))

    def centered(self):
        mu = self.mean
        return FiniteDist(tuple(v - mu for v in self.values), self.probs)

    def quantile_table(self, size):
        """Value index for each of ``size`` equally likely symbols.

        ``size`` must be a multiple of every probability denominator so that
        the pushed-forward law is exact.
        """
        if size % self.resolution:
            raise ConfigurationError(
                f"alphabet {size} is not a multiple of the probability "
                f"resolution {self.resolution}")
        counts = [int(p * size) for p in self.probs]
        return np.repeat(np.arange(len(counts)), counts)


def scaled_pm1(scale):
    s = to_fraction(scale)
    return FiniteDist((-s, s), (Fraction(1, 2), Fraction(1, 2)))


def centered_bernoulli(p, scale=1):
    """``scale * (B - p)`` for B ~ Bernoulli(p)."""
    p, s = to_fraction(p), to_fraction(scale)
    if not 0 <= p <= 1:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    return FiniteDist((s * (1 - p), -s * p), (p, 1 - p))


def centered_uniform(m, scale=1):
    """``scale * (U - (m-1)/2)`` for U uniform on range(m)."""
    s = to_fraction(scale)
    half = Fraction(m - 1, 2)
    return FiniteDist(tuple(s * (j - half) for j in range(m)),
                      (Fraction(1, m),) * m)


def common_alphabet(dists):
    """Smallest power of two that every distribution can be coupled to."""
    res = math.lcm(*(d.resolution for d in dists))
    if res & (res - 1):
        raise ConfigurationError(
            f"probability denominators must be powers of two (lcm {res})")
    return max(2, res)
