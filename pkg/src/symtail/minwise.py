"""Min-wise (l-minima-wise) independence tests for hash families [n] -> [m].

Hash values are 0-based: a hash maps into range(m).
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import partial

import numpy as np

from . import gmr, kwise, rng
from .errors import ConfigurationError, DomainError
from .report import ExperimentReport, Timer, exact_str, finalize_binomial, run_chunks
from .stats import CONFIDENCE


@dataclass(frozen=True)
class MinwiseQuery:
    """Event h(t_1) < ... < h(t_l) < min h(S \\ T) over hashes into range(m)."""

    S: tuple
    T: tuple
    m: int

    def __post_init__(self):
        S = tuple(sorted(set(int(s) for s in self.S)))
        T = tuple(int(t) for t in self.T)
        if len(set(T)) != len(T):
            raise DomainError("T must hold distinct elements")
        if not set(T) <= set(S):
            raise DomainError("T must be a subset of S")
        if any(s < 0 for s in S):
            raise DomainError("coordinates must be nonnegative")
        if self.m < 1:
            raise DomainError("m must be >= 1")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "T", T)

    @property
    def ell(self):
        return len(self.T)

    @property
    def rest(self):
        ts = set(self.T)
        return tuple(s for s in self.S if s not in ts)


def exact_uniform_minima_prob(size_s, ell, m):
    """Probability of the minima event for a truly random hash.

    Sum over the largest designated value a (1-based) of
    C(a-1, l-1) m^-l ((m-a)/m)^(|S|-l); depends on S only through |S|.
    """
    if ell < 0 or size_s < 0 or m < 1:
        raise DomainError("need 0 <= l, 0 <= |S| and m >= 1")
    if ell > size_s:
        raise DomainError(f"l = {ell} exceeds |S| = {size_s}")
    if ell == 0:
        return Fraction(1)
    rest = size_s - ell
    return sum((math.comb(a - 1, ell - 1) * Fraction(m - a, m) ** rest
                for a in range(ell, m + 1)), Fraction(0)) / m ** ell


def brute_force_minima_prob(size_s, ell, m):
    """Same probability by enumerating all m^|S| assignments (T = first l of S)."""
    if ell > size_s:
        raise DomainError(f"l = {ell} exceeds |S| = {size_s}")
    hits = 0
    for vals in itertools.product(range(m), repeat=size_s):
        head, tail = vals[:ell], vals[ell:]
        ok = all(a < b for a, b in zip(head, head[1:]))
        if ok and ell and tail:
            ok = head[-1] < min(tail)
        hits += ok
    return Fraction(hits, m ** size_s)


def minima_event(values, query):
    """Row-wise indicator of the minima event on a ``(rows, n)`` hash array."""
    v = np.asarray(values)
    ok = np.ones(len(v), dtype=bool)
    T = list(query.T)
    for a, b in zip(T, T[1:]):
        ok &= v[:, a] < v[:, b]
    rest = list(query.rest)
    if T and rest:
        ok &= v[:, T[-1]] < v[:, rest].min(axis=1)
    return ok


# --- families -----------------------------------------------------------------


@dataclass(frozen=True)
class GmrFamily:
    params: object
    seed: int = 0
    name: str = "gmr"

    @property
    def n(self):
        return self.params.n

    @property
    def m(self):
        return self.params.m

    def hashes(self, lo, hi):
        return gmr.evaluate(self.params, self.seed, np.arange(lo, hi))

    def epsilon(self, query):
        return self.params.delta

    def describe(self):
        return {"family": self.name, "schedule": self.params.to_dict(),
                "seed_bits": gmr.seed_length(self.params)["bits"]}


@dataclass(frozen=True)
class KWiseFamily:
    spec: object
    name: str = "kwise"

    @property
    def n(self):
        return self.spec.n

    @property
    def m(self):
        return self.spec.size

    def hashes(self, lo, hi):
        return kwise.sample_symbols(self.spec, np.arange(lo, hi))

    def epsilon(self, query):
        # any event on at most k coordinates has exactly the uniform law
        return 0.0 if len(query.S) <= self.spec.k else None

    def describe(self):
        return {"family": self.name, "k": self.spec.k,
                "field_bits": self.spec.field_bits,
                "seed_bits": kwise.seed_length(self.spec).bits}


@dataclass(frozen=True)
class RandomFamily:
    n: int
    m: int
    seed: int = 0
    name: str = "random"

    def hashes(self, lo, hi):
        key = rng.derive_key(self.seed, "random-hash", self.n, self.m)
        return rng.symbols(key, np.arange(lo, hi), self.n, self.m)

    def epsilon(self, query):
        return 0.0

    def describe(self):
        return {"family": self.name}


def make_family(kind, n, m, seed=0, delta=0.1, C=gmr.DEFAULT_C, k=4):
    if kind == "gmr":
        return GmrFamily(gmr.GmrParams(n, m, delta, C), seed)
    if kind == "kwise":
        return KWiseFamily(kwise.KWiseSpec(n=n, k=k, alphabet=m, master_seed=seed))
    if kind == "random":
        return RandomFamily(n, m, seed)
    raise ConfigurationError(f"unknown family {kind!r}")


def _minwise_chunk(family, query, lo, hi):
    return {"hits": int(minima_event(family.hashes(lo, hi), query).sum())}


def minwise_test(family, query, trials, workers=1, epsilon=None):
    """Compare the family's minima-event frequency with the uniform value.

    Passes iff the uniform value lies within eps * C(m, l) of the 99% Wilson
    interval, with eps the family's rectangle error (``epsilon`` overrides).
    """
    if query.ell == 0:
        raise DomainError("l = 0 gives a vacuous minima event")
    if query.m != family.m:
        raise ConfigurationError(f"query range {query.m} != family range {family.m}")
    if query.S[-1] >= family.n:
        raise ConfigurationError("S reaches beyond the family's domain")
    eps = family.epsilon(query) if epsilon is None else epsilon
    warnings = []
    if eps is None:
        eps = 0.0
        warnings.append("family has no stated error for this event; using 0")
    exact = exact_uniform_minima_prob(len(query.S), query.ell, query.m)
    tol = eps * math.comb(query.m, query.ell)
    with Timer() as tm:
        tot = run_chunks(partial(_minwise_chunk, family, query), trials, workers)
    pars = {"rule": "two_sided", "tolerance": tol, "epsilon": eps,
            "confidence": CONFIDENCE, "S": list(query.S), "T": list(query.T),
            "m": query.m, "family": family.describe(),
            "trial_ranges": [[0, trials]]}
    rep = ExperimentReport(command="minwise", parameters=pars,
                           reference=float(exact), trials=trials,
                           successes=int(tot["hits"]), wall_time=tm.elapsed,
                           exact={"reference": exact_str(exact)},
                           warnings=warnings)
    finalize_binomial(rep)
    rep.extra["abs_error"] = abs(rep.estimate - float(exact))
    return rep


def rectangle_encoding(query, A, n=None):
    """Rectangle accepting exactly when h(t_j) = A[j] and h(S \\ T) > A[-1].

    ``A`` is strictly increasing in range(m); coordinates outside S accept
    everything.
    """
    A = tuple(int(a) for a in A)
    if len(A) != query.ell:
        raise DomainError(f"need {query.ell} values, got {len(A)}")
    if any(b <= a for a, b in zip(A, A[1:])):
        raise DomainError("values must be strictly increasing")
    if A and (A[0] < 0 or A[-1] >= query.m):
        raise DomainError(f"values must lie in range({query.m})")
    n = (query.S[-1] + 1 if query.S else 0) if n is None else n
    full = tuple(range(query.m))
    sets = [full] * n
    for t, a in zip(query.T, A):
        sets[t] = (a,)
    if A:
        above = tuple(range(A[-1] + 1, query.m))
        for s in query.rest:
            sets[s] = above
    return gmr.Rectangle(query.m, tuple(sets))


def encoded_rectangles(query, n=None):
    """All C(m, l) rectangles whose disjoint union is the minima event."""
    for A in itertools.combinations(range(query.m), query.ell):
        yield rectangle_encoding(query, A, n)
