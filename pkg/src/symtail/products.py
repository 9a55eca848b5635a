"""Expectations of products under limited independence and truncated expansions."""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import kwise
from .dists import FiniteDist, common_alphabet
from .errors import ConfigurationError, DomainError
from .report import ExperimentReport, Timer, exact_str
from .sympoly import elementary_profile, to_fraction


@dataclass(frozen=True)
class BoundedVarSpec:
    """Independent-coordinate description: one finite distribution on [-1, 1] each."""

    coords: tuple

    def __post_init__(self):
        coords = tuple(c if isinstance(c, FiniteDist) else FiniteDist(*c)
                       for c in self.coords)
        if not coords:
            raise ConfigurationError("need at least one coordinate")
        for i, c in enumerate(coords):
            if any(abs(v) > 1 for v in c.values):
                raise DomainError(f"coordinate {i} has support outside [-1, 1]")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_json(cls, data):
        """``[[{"value": "p/q", "prob": "p/q"}, ...], ...]``, one list per coordinate.

        The list may also be wrapped as ``{"coordinates": [...]}``.
        """
        if isinstance(data, dict) and "coordinates" in data:
            data = data["coordinates"]
        if not isinstance(data, list):
            raise ConfigurationError("spec must be a list of coordinates")
        return cls(tuple(FiniteDist.from_json(c) for c in data))

    def to_json(self):
        return [c.to_json() for c in self.coords]

    @property
    def n(self):
        return len(self.coords)

    @property
    def means(self):
        return tuple(c.mean for c in self.coords)

    @property
    def variances(self):
        return tuple(c.variance for c in self.coords)

    @property
    def sigma2(self):
        return sum(self.variances, Fraction(0))

    @property
    def sigma(self):
        return math.sqrt(self.sigma2)

    @property
    def product_of_means(self):
        return math.prod(self.means, start=Fraction(1))

    @property
    def alphabet(self):
        return common_alphabet(self.coords)

    def sampler(self, wise, seed=0):
        """A ``wise``-wise sampler whose alphabet realizes every coordinate."""
        return kwise.KWiseSpec(n=self.n, k=wise, alphabet=self.alphabet,
                               master_seed=seed)


@dataclass(frozen=True)
class JointDistribution:
    """An explicit finite joint law: ``rows[j]`` has probability ``probs[j]``."""

    rows: tuple
    probs: tuple

    def __post_init__(self):
        rows = tuple(tuple(to_fraction(v) for v in r) for r in self.rows)
        probs = tuple(to_fraction(p) for p in self.probs)
        if len(rows) != len(probs) or not rows:
            raise ConfigurationError("rows and probs must match and be non-empty")
        if len({len(r) for r in rows}) != 1:
            raise ConfigurationError("rows differ in length")
        if any(p < 0 for p in probs) or sum(probs) != 1:
            raise ConfigurationError("probabilities must be >= 0 and sum to 1")
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "probs", probs)

    @property
    def n(self):
        return len(self.rows[0])

    def marginal(self, coords):
        out = {}
        for r, p in zip(self.rows, self.probs):
            key = tuple(r[i] for i in coords)
            out[key] = out.get(key, Fraction(0)) + p
        return out

    @property
    def means(self):
        return tuple(sum((r[i] * p for r, p in zip(self.rows, self.probs)),
                         Fraction(0)) for i in range(self.n))

    def is_kwise(self, k):
        """True iff every k coordinates are mutually independent."""
        singles = [self.marginal((i,)) for i in range(self.n)]
        for sub in itertools.combinations(range(self.n), k):
            joint = self.marginal(sub)
            for combo in itertools.product(*(singles[i].items() for i in sub)):
                key = tuple(val[0] for val, _ in combo)
                p = math.prod((pr for _, pr in combo), start=Fraction(1))
                if joint.get(key, Fraction(0)) != p:
                    return False
        return True

    def independence_degree(self):
        """Largest k <= n with k-wise independence (0 if not even 1-wise)."""
        deg = 1
        while deg < self.n and self.is_kwise(deg + 1):
            deg += 1
        return deg


def parity_distribution(n):
    """X_1..X_{n-1} uniform ±1 and X_n their product.

    Every n-1 coordinates are independent, yet the product of all n is
    identically 1 while the product of the means is 0.
    """
    if n < 2:
        raise DomainError("parity example needs n >= 2")
    rows = []
    for bits in itertools.product((-1, 1), repeat=n - 1):
        rows.append(bits + (math.prod(bits),))
    return JointDistribution(tuple(rows), (Fraction(1, 2 ** (n - 1)),) * len(rows))


# --- exact sums over sampler supports -------------------------------------------


def _is_prime(p):
    if p < 2:
        return False
    for d in range(2, math.isqrt(p) + 1):
        if p % d == 0:
            return False
    return True


def _primes_below(limit, count):
    out = []
    p = limit - 1
    while len(out) < count:
        if _is_prime(p):
            out.append(p)
        p -= 1
    return out


_PRIMES = _primes_below(1 << 31, 24)


def _crt(residues, moduli):
    x, mod = 0, 1
    for r, p in zip(residues, moduli):
        t = ((r - x) * pow(mod, -1, p)) % p
        x += mod * t
        mod *= p
    return x if 2 * x < mod else x - mod


def support_product_sum(spec, numerators, budget=kwise.DEFAULT_BUDGET):
    """Exact integer sum over the support of prod_i numerators[i][symbol_i].

    Products are reduced modulo several 31-bit primes (exact in int64) and
    recombined by the Chinese remainder theorem; enough primes are used to
    cover the worst-case magnitude.
    """
    nums = [list(map(int, row)) for row in numerators]
    bound = spec.support_size * math.prod(max(abs(v) for v in row) for row in nums)
    primes, mod = [], 1
    for p in _PRIMES:
        if mod > 2 * bound:
            break
        primes.append(p)
        mod *= p
    if mod <= 2 * bound:
        raise ConfigurationError("product magnitude exceeds the CRT capacity")
    tables = [np.array([[v % p for v in row] for row in nums], dtype=np.int64)
              for p in primes]
    acc = [0] * len(primes)
    cols = np.arange(spec.n)
    for sym in kwise.iter_support_symbols(spec, budget):
        for j, (p, tab) in enumerate(zip(primes, tables)):
            vals = tab[cols, sym]
            prod = vals[:, 0].copy()
            for i in range(1, spec.n):
                prod = prod * vals[:, i] % p
            acc[j] = (acc[j] + int(prod.sum() % p)) % p
    return _crt(acc, primes)


def exact_product_expectation(spec, sampler=None, budget=kwise.DEFAULT_BUDGET):
    """E[prod X_i] exactly.

    ``sampler`` is a KWiseSpec (coordinates realized from its symbols by the
    quantile map), a JointDistribution, or None for full independence. A
    KWiseSpec with k >= n is fully independent (a degree < n polynomial
    through n points is uniform), so its value is the product of the means.
    """
    if isinstance(sampler, JointDistribution):
        return sum((math.prod(r, start=Fraction(1)) * p
                    for r, p in zip(sampler.rows, sampler.probs)), Fraction(0))
    if sampler is None or sampler.k >= spec.n:
        return spec.product_of_means
    return product_expectation_enumerated(spec, sampler, budget)


def product_expectation_enumerated(spec, sampler, budget=kwise.DEFAULT_BUDGET):
    """Like exact_product_expectation but always enumerates the support."""
    if sampler.n != spec.n:
        raise ConfigurationError("sampler and spec differ in n")
    size = sampler.size
    tables = [c.quantile_table(size) for c in spec.coords]
    den = math.lcm(*(v.denominator for c in spec.coords for v in c.values))
    numerators = [[int(c.values[j] * den) for j in tab]
                  for c, tab in zip(spec.coords, tables)]
    total = support_product_sum(sampler, numerators, budget)
    return Fraction(total, sampler.support_size * den ** spec.n)


# --- truncations -------------------------------------------------------------


@dataclass(frozen=True)
class TruncationResult:
    k: int
    truncated: object
    full: object = None

    @property
    def residual(self):
        return None if self.full is None else self.full - self.truncated

    def to_dict(self):
        def enc(x):
            return None if x is None else {"decimal": float(x), "exact": exact_str(x)}
        return {"k": self.k, "truncated": enc(self.truncated),
                "full": enc(self.full), "residual": enc(self.residual)}


def taylor_truncation(mu, z, k):
    """prod(mu) * sum_{j<=k} S_j(z); the full sum equals prod mu_i (1 + z_i)."""
    mu = tuple(to_fraction(m) for m in mu)
    if len(mu) != len(z):
        raise ConfigurationError("mu and z differ in length")
    for i, m in enumerate(mu):
        if m == 0:
            raise DomainError(f"mean of coordinate {i} is zero; "
                              f"use the inclusion-exclusion form instead")
    if k < 0:
        raise DomainError("order must be >= 0")
    prof = elementary_profile(z, "exact")
    scale = math.prod(mu, start=Fraction(1))
    return TruncationResult(k, scale * sum(prof.values[:k + 1], Fraction(0)),
                            scale * sum(prof.values, Fraction(0)))


class BonferroniResult(TruncationResult):
    @property
    def sandwich_holds(self):
        if self.k % 2 == 0:
            return self.truncated >= self.full
        return self.truncated <= self.full


def bonferroni_truncation(y, k):
    """sum_{j<=k} (-1)^j S_j(y), bracketing prod (1 - y_i) from alternating sides."""
    y = tuple(to_fraction(v) for v in y)
    for i, v in enumerate(y):
        if not 0 <= v <= 1:
            raise DomainError(f"entry {i} = {v} lies outside [0, 1]")
    if k < 0:
        raise DomainError("order must be >= 0")
    prof = elementary_profile(y, "exact")
    part = sum(((-1) ** j * s for j, s in enumerate(prof.values[:k + 1])),
               Fraction(0))
    full = math.prod((1 - v for v in y), start=Fraction(1))
    return BonferroniResult(k, part, full)


# --- error ladder ---------------------------------------------------------------


def decay_slope(ks, errors):
    """Least-squares slope of log(error) against k over the nonzero errors."""
    pts = [(k, math.log(float(e))) for k, e in zip(ks, errors) if e > 0]
    if len(pts) < 2:
        return None
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


def log_error_decreasing(errors):
    """Downward trend: no step increases and the last error is below the first.

    Errors that are zero from the start count as decreasing (nothing is left
    to decay).
    """
    if any(b > a for a, b in zip(errors, errors[1:])):
        return False
    return errors[-1] < errors[0] or errors[0] == 0


def product_error_ladder(spec, k_values, c1=40, c2=0.25, c_prime=40, seed=0,
                         budget=kwise.DEFAULT_BUDGET):
    """Exact |E[prod X] - prod mu| under (2k+2)-wise samplers for each k.

    Passes iff every error is at most (c_prime sigma)^k. The (c1 sigma)^(c2 k)
    bound and a geometric decay fit are reported alongside.
    """
    ks = sorted(set(int(k) for k in k_values))
    if not ks or ks[0] < 1:
        raise ConfigurationError("k ladder must hold integers >= 1")
    sigma = spec.sigma
    target = spec.product_of_means
    rows, errors = [], []
    with Timer() as tm:
        for k in ks:
            sampler = spec.sampler(2 * k + 2, seed)
            value = exact_product_expectation(spec, sampler, budget)
            err = abs(value - target)
            errors.append(err)
            b_prime = (c_prime * sigma) ** k
            b1 = (c1 * sigma) ** (c2 * k)
            rows.append({"k": k, "wise": 2 * k + 2,
                         "fully_independent": sampler.k >= spec.n,
                         "support_size": sampler.support_size,
                         "expectation": exact_str(value),
                         "error": float(err), "error_exact": exact_str(err),
                         "bound_c_prime": b_prime, "within_c_prime": float(err) <= b_prime,
                         "bound_c1_c2": b1, "within_c1_c2": float(err) <= b1})
    ok = all(r["within_c_prime"] for r in rows)
    params = {"rule": "exact", "n": spec.n, "k_values": ks, "c1": c1, "c2": c2,
              "c_prime": c_prime, "sigma": sigma, "sigma2": exact_str(spec.sigma2),
              "seed": seed, "alphabet": spec.alphabet, "spec": spec.to_json()}
    return ExperimentReport(
        command="product", parameters=params,
        estimate=float(errors[-1]), reference=rows[-1]["bound_c_prime"],
        verdict="pass" if ok else "fail", wall_time=tm.elapsed,
        exact={"product_of_means": exact_str(target)},
        extra={"ladder": rows, "decay_slope": decay_slope(ks, errors),
               "log_error_decreasing": log_error_decreasing(errors)})
