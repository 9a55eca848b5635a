"""Alphabet-squaring hash family: schedule, evaluation and rectangle tests.

Level 0 is a k_0-wise function [n] -> [m_0]. Level t refines it with a
k_t-wise table over [m_{t-1}] x [n] -> [m_t], read at cell a*n + i where a is
the level t-1 value of coordinate i. The final hash is g_T(i) mod m.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial

import numpy as np

from . import kwise, rng
from .errors import ConfigurationError, DomainError
from .gf2 import MAX_BITS
from .report import (ExperimentReport, Timer, exact_str, finalize_binomial,
                     run_chunks)
from .stats import CONFIDENCE, wilson_interval

DEFAULT_C = 4


def _is_pow2(m):
    return isinstance(m, int) and m >= 1 and m & (m - 1) == 0


def _bits(x):
    return max(1, (int(x) - 1).bit_length())


@dataclass(frozen=True)
class Level:
    t: int
    m: int             # alphabet size m_t
    k: int             # independence k_t
    bits: int          # field bits b_t
    domain: int        # n for t = 0, m_{t-1} * n otherwise
    log2_eps: float    # log2 of the (never binding) epsilon target

    def to_dict(self):
        return dict(self.__dict__)


@dataclass(frozen=True)
class GmrParams:
    """Level schedule for hashing [n] -> [m] with rectangle error delta."""

    n: int
    m: int
    delta: float
    C: float = DEFAULT_C
    m0: int = field(init=False)
    T: int = field(init=False)
    delta_prime: float = field(init=False)
    levels: tuple = field(init=False)

    def __post_init__(self):
        n, m, delta, C = self.n, self.m, self.delta, self.C
        if not isinstance(n, int) or n < 1:
            raise ConfigurationError(f"n must be a positive int, got {n!r}")
        if not _is_pow2(m) or m < 2:
            raise ConfigurationError(f"m must be a power of two >= 2, got {m!r}")
        if not 0 < delta < 1:
            raise ConfigurationError(f"delta must lie in (0, 1), got {delta!r}")
        if not C > 0:
            raise ConfigurationError("C must be positive")
        base = C * math.log(1 / delta)
        m0 = 2
        while m0 < base:
            m0 *= 2
        sizes = [m0]
        while sizes[-1] < m:
            sizes.append(sizes[-1] ** 2)
        T = len(sizes) - 1
        dp = delta / T if T else delta
        L = C * math.log(1 / dp)
        k0 = math.ceil(L)
        k0 += 1 - k0 % 2
        levels = [Level(0, m0, k0, _bits(max(n, m0)), n,
                        math.log2(dp) - C * k0 * math.log2(m0))]
        for t in range(1, T + 1):
            mt = sizes[t]
            kt = max(math.ceil(L / math.log(mt)), 2)
            dom = sizes[t - 1] * n
            levels.append(Level(t, mt, kt, _bits(max(dom, mt)), dom,
                                -C * kt * math.log2(mt)))
        for lv in levels:
            if lv.bits > MAX_BITS:
                raise ConfigurationError(
                    f"level {lv.t} needs a 2^{lv.bits} field (> 2^{MAX_BITS}); "
                    f"reduce n or m")
        object.__setattr__(self, "m0", m0)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "delta_prime", dp)
        object.__setattr__(self, "levels", tuple(levels))

    @property
    def hypothesis_flags(self):
        """Per squaring level, whether m_{t-1} >= ln(1/delta')^C holds."""
        need = math.log(1 / self.delta_prime) ** self.C
        return [{"t": lv.t, "m_prev": self.levels[lv.t - 1].m,
                 "required": need, "holds": self.levels[lv.t - 1].m >= need}
                for lv in self.levels[1:]]

    def level_spec(self, t, master_seed=0):
        lv = self.levels[t]
        return kwise.KWiseSpec(n=lv.domain, k=lv.k, alphabet=lv.m,
                               field_bits=lv.bits, master_seed=master_seed)

    def level_key(self, t, master_seed):
        lv = self.levels[t]
        return rng.derive_key(master_seed, "gmr", t, self.n, self.m, lv.k, lv.bits)

    def to_dict(self):
        return {"n": self.n, "m": self.m, "delta": self.delta, "C": self.C,
                "m0": self.m0, "T": self.T, "delta_prime": self.delta_prime,
                "levels": [lv.to_dict() for lv in self.levels],
                "level_hypotheses": self.hypothesis_flags}

    def table(self):
        head = f"{'t':>3} {'m_t':>8} {'k_t':>4} {'b_t':>4} {'domain':>10} {'log2 eps_t':>12}"
        lines = [f"n={self.n} m={self.m} delta={self.delta} C={self.C} "
                 f"T={self.T} delta'={self.delta_prime:.6g}", head]
        for lv in self.levels:
            lines.append(f"{lv.t:>3} {lv.m:>8} {lv.k:>4} {lv.bits:>4} "
                         f"{lv.domain:>10} {lv.log2_eps:>12.1f}")
        sl = seed_length(self)
        lines.append(f"seed bits: {sl['bits']}  ({sl['reference']})")
        return "\n".join(lines)


def derive_schedule(n, m, delta, C=DEFAULT_C):
    return GmrParams(n, m, delta, C)


def seed_length(params):
    """Actual bits sum_t k_t b_t, with the asymptotic reference as a string."""
    bits = sum(lv.k * lv.bits for lv in params.levels)
    n, m, d = params.n, params.m, params.delta
    ll = math.log2(max(2.0, math.log2(max(m / d, 2))))
    ref = (f"O((log log n + log(m/delta)) log log(m/delta)); "
           f"(log2 log2 n + log2(m/delta)) * log2 log2(m/delta) = "
           f"{(math.log2(max(1.0, math.log2(max(n, 2)))) + math.log2(m / d)) * ll:.4g}")
    return {"bits": bits, "per_level": [lv.k * lv.bits for lv in params.levels],
            "reference": ref}


# --- evaluation ---------------------------------------------------------------


def _level_values(params, t, master_seed, idx, cells, random):
    lv = params.levels[t]
    if random:
        key = rng.derive_key(master_seed, "gmr-random", t)
        w = rng.cell_words(key, idx, cells)
        return (w & np.uint64(lv.m - 1)).astype(np.int64)
    spec = params.level_spec(t)
    words = rng.words(params.level_key(t, master_seed), idx, lv.k)
    coeffs = (words & np.uint64((1 << lv.bits) - 1)).astype(np.int64)
    return spec.gf.horner(coeffs, cells) & (lv.m - 1)


def evaluate(params, master_seed, indices, coords=None, hybrid=0):
    """Hash values for trials ``indices`` at coordinates ``coords``.

    Returns ``(len(indices), len(coords))`` values in [m]. Levels below
    ``hybrid`` are replaced by truly random functions (read lazily from a
    counter stream keyed by trial, level and cell); ``hybrid = 0`` is the
    pseudorandom family and ``hybrid = T + 1`` is a uniformly random hash.
    """
    if not 0 <= hybrid <= params.T + 1:
        raise DomainError(f"hybrid index must lie in [0, {params.T + 1}]")
    idx = np.atleast_1d(np.asarray(indices, dtype=np.int64))
    coords = (np.arange(params.n, dtype=np.int64) if coords is None
              else np.asarray(coords, dtype=np.int64))
    if hybrid == params.T + 1:
        # g_T uniform: reading its own table is equivalent and cheaper
        start = params.T
    else:
        start = 0
    cells = np.broadcast_to(coords, (len(idx), len(coords)))
    g = None
    for t in range(start, params.T + 1):
        if t > start:
            cells = g * params.n + coords
        g = _level_values(params, t, master_seed, idx, cells, t < hybrid)
    return g & (params.m - 1)


@dataclass(frozen=True)
class HashFunction:
    """One member of the family, evaluated lazily coordinate by coordinate."""

    params: GmrParams
    master_seed: int
    index: int = 0
    hybrid: int = 0

    def __call__(self, i):
        if not 0 <= i < self.params.n:
            raise DomainError(f"coordinate {i} outside [0, {self.params.n})")
        return int(evaluate(self.params, self.master_seed, [self.index],
                            [i], self.hybrid)[0, 0])

    def table(self):
        return evaluate(self.params, self.master_seed, [self.index],
                        None, self.hybrid)[0]

    @property
    def seed_bits(self):
        return seed_length(self.params)["bits"]


def sample_hash(params, master_seed, index=0):
    return HashFunction(params, master_seed, index)


# --- rectangles ------------------------------------------------------------------


@dataclass(frozen=True)
class Rectangle:
    """Accept sets S_i within [m], one per coordinate."""

    m: int
    sets: tuple

    def __post_init__(self):
        sets = tuple(tuple(sorted(set(int(v) for v in s))) for s in self.sets)
        for i, s in enumerate(sets):
            if s and (s[0] < 0 or s[-1] >= self.m):
                raise DomainError(f"set {i} leaves [0, {self.m})")
        object.__setattr__(self, "sets", sets)

    @classmethod
    def full(cls, m, n):
        return cls(m, (range(m),) * n)

    @property
    def n(self):
        return len(self.sets)

    @property
    def p(self):
        return tuple(Fraction(len(s), self.m) for s in self.sets)

    @property
    def q_sum(self):
        return float(sum(1 - p for p in self.p))

    def mask(self):
        out = np.zeros((self.n, self.m), dtype=bool)
        for i, s in enumerate(self.sets):
            out[i, list(s)] = True
        return out

    def accepts(self, values):
        """Row-wise acceptance of a ``(rows, n)`` value array."""
        mk = self.mask()
        return mk[np.arange(self.n), values].all(axis=1)

    def to_json(self):
        return [list(s) for s in self.sets]


def rectangle_probability_exact(rect):
    return math.prod(rect.p, start=Fraction(1))


def load_rectangles(data, m, n=None):
    """Parse a rectangle JSON document: a list of rectangles, each a list of sets."""
    if not isinstance(data, list) or not data:
        raise ConfigurationError("rectangle file must hold a non-empty list")
    if all(isinstance(s, list) and all(isinstance(v, int) for v in s) for s in data):
        data = [data]
    rects = []
    for r in data:
        if not isinstance(r, list):
            raise ConfigurationError("each rectangle is a list of integer sets")
        rect = Rectangle(m, tuple(r))
        if n is not None and rect.n != n:
            raise ConfigurationError(f"rectangle has {rect.n} coordinates, expected {n}")
        rects.append(rect)
    return rects


def random_rectangle(n, m, shape, rs):
    """A random rectangle of shape ``dense``, ``sparse`` or ``mixed``.

    ``rs`` is a numpy Generator. Dense rectangles miss a few symbols per
    coordinate; sparse ones put a handful of coordinates below m^-0.1
    acceptance; mixed combine both.
    """
    sets = [list(range(m)) for _ in range(n)]
    head = max(1, int(m ** 0.9) - 1)          # |S| / m < m^-0.1

    def drop(i, r):
        keep = rs.choice(m, size=m - r, replace=False)
        sets[i] = sorted(int(v) for v in keep)

    if shape in ("dense", "mixed"):
        for i in range(n):
            r = int(rs.integers(0, max(2, m // 16) + 1))
            drop(i, r)
    if shape in ("sparse", "mixed"):
        count = 1 if shape == "mixed" else int(rs.integers(1, 3))
        for i in rs.choice(n, size=count, replace=False):
            size = int(rs.integers(1, head + 1))
            sets[int(i)] = sorted(int(v) for v in rs.choice(m, size=size, replace=False))
    if shape not in ("dense", "sparse", "mixed"):
        raise ConfigurationError(f"unknown rectangle shape {shape!r}")
    return Rectangle(m, tuple(sets))


def rectangle_battery(n, m, per_class=20, seed=0):
    rs = np.random.default_rng(seed)
    return [(shape, random_rectangle(n, m, shape, rs))
            for shape in ("dense", "sparse", "mixed") for _ in range(per_class)]


def _battery_chunk(params, master_seed, masks, hybrids, lo, hi):
    idx = np.arange(lo, hi, dtype=np.int64)
    rows = np.arange(params.n)
    out = np.zeros((len(hybrids), len(masks)), dtype=np.int64)
    for h, hyb in enumerate(hybrids):
        g = evaluate(params, master_seed, idx, None, hyb)
        for r, mk in enumerate(masks):
            out[h, r] = int(mk[rows, g].all(axis=1).sum())
    return {"counts": out}


def battery_counts(params, rects, trials, master_seed=0, hybrids=(0,), workers=1):
    """Acceptance counts, shape ``(len(hybrids), len(rects))``, on shared trials."""
    for r in rects:
        if r.n != params.n or r.m != params.m:
            raise ConfigurationError("rectangle does not match (n, m)")
    masks = [r.mask() for r in rects]
    fn = partial(_battery_chunk, params, master_seed, masks, tuple(hybrids))
    return run_chunks(fn, trials, workers)["counts"]


def _rect_report(params, rect, trials, successes, master_seed, wall, hybrid=0):
    exact = rectangle_probability_exact(rect)
    pars = {"rule": "two_sided", "tolerance": params.delta,
            "confidence": CONFIDENCE, "seed": master_seed, "hybrid": hybrid,
            "schedule": params.to_dict(), "rectangle": rect.to_json(),
            "trial_ranges": [[0, trials]]}
    rep = ExperimentReport(command="gmr", parameters=pars, reference=float(exact),
                           trials=trials, successes=successes, wall_time=wall,
                           exact={"reference": exact_str(exact)},
                           extra={"q_sum": rect.q_sum})
    lo, hi = wilson_interval(0, trials)
    if trials and (hi - lo) / 2 > params.delta / 2:
        rep.warnings.append(
            f"{trials} trials give a Wilson margin above delta/2")
    finalize_binomial(rep)
    rep.extra["abs_error"] = abs(rep.estimate - float(exact))
    return rep


def rectangle_test(params, rect, trials, master_seed=0, workers=1):
    """Estimate Pr[g(i) in S_i for all i] and compare to prod p_i.

    Passes iff prod p_i lies within delta of the 99% Wilson interval.
    """
    with Timer() as tm:
        counts = battery_counts(params, [rect], trials, master_seed, (0,), workers)
    return _rect_report(params, rect, trials, int(counts[0, 0]), master_seed,
                        tm.elapsed)


def rectangle_battery_test(params, rects, trials, master_seed=0, workers=1):
    """One report per rectangle, all evaluated on the same hash samples."""
    with Timer() as tm:
        counts = battery_counts(params, rects, trials, master_seed, (0,), workers)
    return [_rect_report(params, r, trials, int(c), master_seed, tm.elapsed)
            for r, c in zip(rects, counts[0])]


def hybrid_diagnostic(params, rect, trials, master_seed=0, level=None, workers=1):
    """Localize rectangle error to individual squaring steps.

    Hybrid L uses truly random levels below L and the family's levels from L
    upward, so hybrid 0 is the family and hybrid T+1 is uniform. All hybrids
    share trial indices. Adjacent deltas |p_L - p_{L+1}| are each compared to
    delta' plus the summed Wilson margins; the final term |p_{T+1} - prod p_i|
    closes the telescoping sum, so the deltas always add up to at least the
    observed total error. ``level`` selects the step highlighted as the
    report estimate (default: the largest delta).
    """
    hybrids = tuple(range(params.T + 2))
    exact = rectangle_probability_exact(rect)
    with Timer() as tm:
        counts = battery_counts(params, [rect], trials, master_seed, hybrids,
                                workers)[:, 0]
    est = [int(c) / trials for c in counts]
    ci = [wilson_interval(int(c), trials) for c in counts]
    steps = []
    for L in range(params.T + 1):
        margin = (ci[L][1] - ci[L][0]) / 2 + (ci[L + 1][1] - ci[L + 1][0]) / 2
        d = abs(est[L] - est[L + 1])
        steps.append({"level": L, "delta": d, "margin": margin,
                      "within": d <= params.delta_prime + margin})
    tail = abs(est[-1] - float(exact))
    total = abs(est[0] - float(exact))
    delta_sum = sum(s["delta"] for s in steps) + tail
    ok = all(s["within"] for s in steps)
    if level is None:
        level = max(range(len(steps)), key=lambda j: steps[j]["delta"])
    if not 0 <= level <= params.T:
        raise DomainError(f"level must lie in [0, {params.T}]")
    pars = {"rule": "exact", "seed": master_seed, "level": level,
            "schedule": params.to_dict(), "rectangle": rect.to_json()}
    return ExperimentReport(
        command="gmr-hybrid", parameters=pars,
        estimate=steps[level]["delta"], reference=params.delta_prime,
        verdict="pass" if ok else "fail", trials=trials, wall_time=tm.elapsed,
        exact={"rectangle_probability": exact_str(exact)},
        extra={"hybrid_estimates": est, "hybrid_counts": [int(c) for c in counts],
               "steps": steps, "uniform_vs_exact": tail, "total_error": total,
               "delta_sum": delta_sum, "triangle_ok": delta_sum >= total - 1e-15})
