"""Second-moment oracles and Monte Carlo checks of tail bounds for S_l(X)."""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial

import numpy as np

from . import kwise, rng
from .dists import FiniteDist, common_alphabet
from .errors import ConfigurationError, DomainError
from .report import ExperimentReport, Timer, exact_str, finalize_binomial, run_chunks
from .stats import CONFIDENCE
from .sympoly import SIX_E, elementary_profile, float_profiles, to_fraction

SQRT_E = math.sqrt(math.e)
# a float tail sum is trusted unless it sits this close (relative to the
# largest intermediate coefficient) to the threshold
FLOAT_SLACK = 1e-12
# budgets expecting fewer hits than this near the bound get a warning
MIN_EXPECTED_HITS = 10


@dataclass(frozen=True)
class MomentProfile:
    """Per-coordinate means and variances (exact rationals)."""

    means: tuple
    variances: tuple

    def __post_init__(self):
        mu = tuple(to_fraction(x) for x in self.means)
        var = tuple(to_fraction(x) for x in self.variances)
        if len(mu) != len(var):
            raise ConfigurationError("means and variances differ in length")
        if any(v < 0 for v in var):
            raise DomainError("variances must be nonnegative")
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "variances", var)

    @classmethod
    def from_dists(cls, dists):
        return cls(tuple(d.mean for d in dists), tuple(d.variance for d in dists))

    @property
    def n(self):
        return len(self.variances)

    @property
    def sigma2(self):
        return sum(self.variances, Fraction(0))

    @property
    def sigma(self):
        return math.sqrt(self.sigma2)


@dataclass(frozen=True)
class SecondMoment:
    ell: int
    exact: Fraction
    bound: Fraction

    @property
    def holds(self):
        return self.exact <= self.bound

    def to_dict(self):
        return {"ell": self.ell, "exact": exact_str(self.exact),
                "exact_decimal": float(self.exact),
                "bound": exact_str(self.bound), "bound_decimal": float(self.bound),
                "holds": self.holds}


def exact_second_moment(variances, ell):
    """E[S_l(X)^2] for independent mean-zero X_i with the given variances.

    The cross terms vanish, leaving e_l(sigma_1^2, ..., sigma_n^2). The
    result carries the bound sigma^(2l) / l!.
    """
    var = tuple(to_fraction(v) for v in variances)
    if any(v < 0 for v in var):
        raise DomainError("variances must be nonnegative")
    if not 0 <= ell <= len(var):
        raise DomainError(f"ell must lie in [0, {len(var)}], got {ell}")
    exact = elementary_profile(var, "exact")[ell]
    s2 = sum(var, Fraction(0))
    result = SecondMoment(ell, exact, s2 ** ell / math.factorial(ell))
    assert result.holds, "second moment exceeds sigma^(2l)/l!"
    return result


@dataclass(frozen=True)
class TailThresholds:
    sigma: float
    t: float
    k: int
    cor22_threshold: float
    cor22_prob: float
    thm15_threshold: float
    thm15_prob: float
    cor22_precondition: bool
    thm15_precondition: bool
    thm15_weak_precondition: bool
    cor22_prob_meaningful: bool

    def to_dict(self):
        return dict(self.__dict__)


def tail_thresholds(sigma, t, k):
    """Thresholds and probability bounds for |S_k| and for sum_{l>=k} |S_l|.

    Precondition failures are reported as flags. ``cor22_prob`` is ``inf``
    for ``t <= 1``.
    """
    if sigma < 0 or t <= 0 or k < 1:
        raise DomainError("need sigma >= 0, t > 0, k >= 1")
    denom = t ** (2 * k) - t ** (2 * (k - 1))
    return TailThresholds(
        sigma=sigma, t=t, k=k,
        cor22_threshold=2 * (SQRT_E * t * sigma / math.sqrt(k)) ** k,
        cor22_prob=1 / denom if denom > 0 else math.inf,
        thm15_threshold=2 * (SIX_E * t * sigma) ** k,
        thm15_prob=2 * t ** (-2 * k),
        cor22_precondition=2 * SQRT_E * t * sigma <= math.sqrt(k),
        thm15_precondition=16 * math.e * t * sigma <= 1,
        thm15_weak_precondition=SIX_E * t * sigma < 0.5,
        cor22_prob_meaningful=t > 1,
    )


def lemma23_envelope(sigma, t, k, ell):
    """Per-degree cap (6 e t sigma)^l (k/l)^(l/2) for l >= k."""
    if ell < k:
        raise DomainError(f"envelope needs ell >= k, got ell={ell} < k={k}")
    return (SIX_E * t * sigma) ** ell * (k / ell) ** (ell / 2)


# --- Monte Carlo --------------------------------------------------------------

STATISTICS = ("thm15", "cor22")


@dataclass(frozen=True)
class TailQuery:
    """One tail-probability experiment.

    ``statistic="thm15"`` tests sum_{l>=k} |S_l(X)| against 2(6 e t sigma)^k
    with independence 2k+2; ``"cor22"`` tests |S_k(X)| against
    2(e^(1/2) t sigma / k^(1/2))^k with independence 2k. ``threshold``
    overrides the formula value.
    """

    k: int
    t: float
    trials: int
    independence: str = "full"
    seed: int = 0
    statistic: str = "thm15"
    threshold: float = None

    def __post_init__(self):
        if self.k < 1 or self.t <= 0 or self.trials < 1:
            raise ConfigurationError("need k >= 1, t > 0 and trials >= 1")
        if self.independence not in ("full", "kwise"):
            raise ConfigurationError("independence must be 'full' or 'kwise'")
        if self.statistic not in STATISTICS:
            raise ConfigurationError(f"statistic must be one of {STATISTICS}")

    @property
    def wise(self):
        """Independence degree required by the tested statement."""
        return 2 * self.k + 2 if self.statistic == "thm15" else 2 * self.k


@dataclass(frozen=True)
class _Coupling:
    """Everything a worker needs to turn trial indices into X rows."""

    n: int
    size: int
    table: np.ndarray            # (n, size) float values per symbol
    exact_table: tuple           # per coordinate, Fraction value per symbol
    spec: object                 # KWiseSpec or None for full independence
    key: int
    k: int
    threshold: float
    statistic: str


def _coupling(query, dists):
    dists = [d.centered() for d in dists]
    n = len(dists)
    if query.independence == "kwise":
        size = common_alphabet(dists)
        spec = kwise.KWiseSpec(n=n, k=query.wise, alphabet=size,
                               master_seed=query.seed)
    else:
        size = math.lcm(*(d.resolution for d in dists))
        spec = None
    exact = []
    for d in dists:
        idx = d.quantile_table(size)
        exact.append(tuple(d.values[j] for j in idx))
    table = np.array([[float(v) for v in row] for row in exact])
    key = rng.derive_key(query.seed, "tail-full", n)
    return _Coupling(n, size, table, tuple(exact), spec, key, query.k,
                     query.threshold, query.statistic)


def _symbols(cp, lo, hi):
    idx = np.arange(lo, hi, dtype=np.int64)
    if cp.spec is not None:
        return kwise.sample_symbols(cp.spec, idx)
    return rng.symbols(cp.key, idx, cp.n, cp.size)


def _exact_statistic(cp, sym_row):
    x = [cp.exact_table[i][s] for i, s in enumerate(sym_row)]
    prof = elementary_profile(x, "exact")
    if cp.statistic == "cor22":
        return abs(prof.get(cp.k))
    return sum((abs(v) for v in prof.values[cp.k:]), Fraction(0))


def _tail_chunk(cp, lo, hi):
    sym = _symbols(cp, lo, hi)
    x = cp.table[np.arange(cp.n), sym]
    values, peaks, flags = float_profiles(x)
    if cp.statistic == "cor22":
        sel = slice(cp.k, cp.k + 1)
    else:
        sel = slice(cp.k, None)
    stat = np.abs(values[:, sel]).sum(axis=1)
    hit = stat >= cp.threshold
    flagged = flags[:, sel].any(axis=1)
    slack = FLOAT_SLACK * (peaks[:, sel].sum(axis=1) + cp.threshold)
    doubtful = np.flatnonzero(flagged & (np.abs(stat - cp.threshold) <= slack))
    thr = Fraction(cp.threshold)
    for r in doubtful:
        hit[r] = _exact_statistic(cp, sym[r]) >= thr
    return {"trials": hi - lo, "successes": int(hit.sum()),
            "flagged": int(flagged.sum()), "recomputed": len(doubtful)}


def mc_tail_experiment(query, dists, workers=1):
    """Estimate the tail probability and compare it to the theoretical bound.

    ``dists`` is a list of FiniteDist, one per coordinate; they are centered
    before use. Passes iff the 99% Wilson lower bound does not exceed the
    probability bound.
    """
    dists = list(dists)
    if not dists:
        raise ConfigurationError("need at least one coordinate")
    mp = MomentProfile.from_dists([d.centered() for d in dists])
    sigma = mp.sigma
    thr = tail_thresholds(sigma, query.t, query.k)
    if query.statistic == "thm15":
        formula_threshold, bound = thr.thm15_threshold, thr.thm15_prob
    else:
        formula_threshold, bound = thr.cor22_threshold, thr.cor22_prob
    threshold = formula_threshold if query.threshold is None else query.threshold
    q = query if query.threshold is not None else _with_threshold(query, threshold)
    cp = _coupling(q, dists)

    with Timer() as tm:
        totals = run_chunks(partial(_tail_chunk, cp), query.trials, workers)
    warnings = []
    if query.trials * min(bound, 1.0) < MIN_EXPECTED_HITS:
        warnings.append(
            f"budget of {query.trials} trials expects fewer than "
            f"{MIN_EXPECTED_HITS} hits at the bound {bound:.3g}")
    if query.statistic == "thm15" and not thr.thm15_precondition:
        warnings.append("16 e t sigma > 1: outside the theorem's hypothesis")
    if query.statistic == "cor22" and not thr.cor22_precondition:
        warnings.append("2 e^(1/2) t sigma > k^(1/2): outside the hypothesis")
    params = {
        "rule": "upper_bound", "confidence": CONFIDENCE,
        "statistic": query.statistic, "n": mp.n, "k": query.k, "t": query.t,
        "independence": query.independence,
        "wise": query.wise if query.independence == "kwise" else None,
        "alphabet": cp.size, "seed": query.seed,
        "sigma": sigma, "sigma2": exact_str(mp.sigma2),
        "threshold": threshold, "formula_threshold": formula_threshold,
        "coordinates": [d.to_json() for d in dists],
        "trial_ranges": [[0, query.trials]],
    }
    report = ExperimentReport(
        command="tailbound", parameters=params, reference=bound,
        trials=int(totals["trials"]), successes=int(totals["successes"]),
        flagged_trial_count=int(totals["flagged"]), wall_time=tm.elapsed,
        extra={"preconditions": thr.to_dict(),
               "recomputed_count": int(totals["recomputed"])},
        warnings=warnings)
    return finalize_binomial(report)


def _with_threshold(query, threshold):
    return TailQuery(query.k, query.t, query.trials, query.independence,
                     query.seed, query.statistic, threshold)


# --- lower-bound construction ---------------------------------------------------


def krawtchouk_table(n, ell):
    """S_l of a ±1 vector with w entries equal to -1, for w = 0..n."""
    return [sum((-1) ** j * math.comb(w, j) * math.comb(n - w, ell - j)
                for j in range(0, min(w, ell) + 1))
            for w in range(n + 1)]


def weight_distribution(spec, budget=kwise.DEFAULT_BUDGET):
    """Count support points by their number of -1 coordinates."""
    counts = np.zeros(spec.n + 1, dtype=np.int64)
    for sym in kwise.iter_support_symbols(spec, budget):
        minus = spec.n - sym.sum(axis=1)
        counts += np.bincount(minus, minlength=spec.n + 1)
    return counts


def lower_bound_experiment(n, k, ell, budget=kwise.DEFAULT_BUDGET):
    """Tail and mean of |S_l| under the translated (2k+2)-wise sampler.

    Exact by support enumeration. Reports Pr[|S_l| >= C(n, l)], the
    all-ones probability, the construction floor (2^b)^-(2k+2), the GF(2)
    rank prediction 2^-rank, E|S_l| and the full-independence bound
    E|S_l| <= C(n, l)^(1/2) <= n^(l/2) / l!^(1/2).
    """
    if not 0 <= ell <= n:
        raise DomainError(f"ell must lie in [0, {n}]")
    spec, _ = kwise.lower_bound_sampler(n, k)
    with Timer() as tm:
        counts = weight_distribution(spec, budget)
    total = int(counts.sum())
    kraw = krawtchouk_table(n, ell)
    big = math.comb(n, ell)
    tail = sum(int(c) for w, c in enumerate(counts) if abs(kraw[w]) >= big)
    p_tail = Fraction(tail, total)
    p_ones = Fraction(int(counts[0]), total)
    floor = Fraction(1, spec.support_size)
    rank = kwise.low_bit_rank(spec)
    p_rank = Fraction(1, 2 ** rank)
    mean_abs = Fraction(sum(int(c) * abs(kraw[w]) for w, c in enumerate(counts)),
                        total)
    second = exact_second_moment([1] * n, ell).exact
    cs = math.sqrt(second)
    crude = n ** (ell / 2) / math.sqrt(math.factorial(ell))
    params = {"rule": "exact", "n": n, "k": k, "ell": ell, "wise": spec.k,
              "field_bits": spec.field_bits}
    report = ExperimentReport(
        command="lowerbound", parameters=params,
        estimate=float(p_tail), reference=float(floor),
        verdict="pass" if p_tail >= floor else "fail",
        trials=total, successes=tail, wall_time=tm.elapsed,
        exact={"estimate": exact_str(p_tail), "reference": exact_str(floor),
               "all_ones": exact_str(p_ones), "rank_prediction": exact_str(p_rank),
               "mean_abs": exact_str(mean_abs)},
        extra={"all_ones_prob": float(p_ones), "floor": float(floor),
               "all_ones_equals_floor": p_ones == floor,
               "gf2_rank": rank, "rank_prediction": float(p_rank),
               "all_ones_equals_rank_prediction": p_ones == p_rank,
               "mean_abs": float(mean_abs),
               "full_independence_second_moment": second,
               "cauchy_schwarz_bound": cs, "crude_bound": crude,
               "exceeds_cauchy_schwarz": float(mean_abs) > cs,
               "weight_counts": [int(c) for c in counts]})
    return report
