"""The acceptance battery, runnable at full or reduced ("quick") budgets.

Each criterion returns a CriterionResult whose ``details`` are deterministic
for a fixed seed, so report bodies can be compared across worker counts.
"""

import itertools
import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import gmr, kwise, minwise, products, sympoly, tailbounds
from .dists import FiniteDist, scaled_pm1
from .report import jsonable
from .stats import wilson_interval


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    details: dict = field(default_factory=dict)
    wall_time: float = 0.0
    time_budget: float = None

    @property
    def within_time(self):
        return self.time_budget is None or self.wall_time <= self.time_budget

    def body(self):
        return {"number": self.number, "title": self.title,
                "passed": self.passed, "details": jsonable(self.details)}

    def to_dict(self):
        d = self.body()
        d["wall_time"] = self.wall_time
        d["time_budget"] = self.time_budget
        return d

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] criterion {self.number}: {self.title} ({self.wall_time:.1f}s)"


def _timed(fn):
    def run(*args, **kw):
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        res.wall_time = time.perf_counter() - t0
        return res
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


# --- 1: inequality corpus --------------------------------------------------------

CLASSES = ("gaussian", "uniform", "pm1", "sparse")


def random_vector(rs, kind, n):
    if kind == "gaussian":
        return rs.standard_normal(n)
    if kind == "uniform":
        return rs.uniform(-1, 1, n)
    if kind == "pm1":
        return rs.choice([-1.0, 1.0], n)
    if kind == "sparse":
        v = rs.standard_normal(n)
        v[rs.random(n) < 0.7] = 0.0
        return v
    raise ValueError(kind)


def inequality_corpus(count, seed=0, max_n=30):
    rs = np.random.default_rng([seed, 1])
    for j in range(count):
        kind = CLASSES[j % len(CLASSES)]
        n = int(rs.integers(1, max_n + 1))
        yield kind, random_vector(rs, kind, n)


@_timed
def criterion1(quick=False, seed=0):
    count = 1000 if quick else 100_000
    viol12 = viol14 = checked14 = 0
    per_class = {c: 0 for c in CLASSES}
    for kind, a in inequality_corpus(count, seed):
        prof = sympoly.elementary_profile(a.tolist(), "exact")
        if not sympoly.theorem12_check(prof).holds:
            viol12 += 1
        for k in range(prof.n):
            C = sympoly.minimal_theorem14_constant(prof, k)
            if C is None:
                continue
            rep = sympoly.theorem14_check(prof, k, C)
            if rep.hypotheses_hold:
                checked14 += 1
                if not rep.holds:
                    viol14 += 1
        per_class[kind] += 1
    return CriterionResult(1, "symmetric-polynomial inequality corpus",
                           viol12 == 0 and viol14 == 0,
                           {"vectors": count, "per_class": per_class,
                            "theorem12_violations": viol12,
                            "theorem14_instances": checked14,
                            "theorem14_violations": viol14},
                           time_budget=300)


# --- 2: tightness -------------------------------------------------------------------


@_timed
def criterion2(quick=False, seed=0):
    n, k = 100, 10
    a = sympoly.alternating_vector(n)
    ratio = sympoly.tightness_ratio(a, k)
    factor = (6 * math.e) ** k
    prof = sympoly.elementary_profile(a, "exact")
    return CriterionResult(2, "alternating-sign tightness witness",
                           1 / factor <= ratio <= factor,
                           {"n": n, "k": k, "S_k": str(prof[k]), "ratio": ratio,
                            "factor": factor,
                            "theorem12_holds": sympoly.theorem12_check(prof).holds},
                           time_budget=1)


# --- 3: second moments -----------------------------------------------------------------


def brute_second_moments(dists):
    """E[S_l^2] for l = 0..n by enumerating the product law."""
    n = len(dists)
    acc = [Fraction(0)] * (n + 1)
    for combo in itertools.product(*(list(zip(d.values, d.probs)) for d in dists)):
        p = math.prod((c[1] for c in combo), start=Fraction(1))
        prof = sympoly.elementary_profile([c[0] for c in combo], "exact")
        for ell in range(n + 1):
            acc[ell] += p * prof[ell] ** 2
    return acc


def _mixed_dists(n, rs):
    pool = [scaled_pm1(1), scaled_pm1(Fraction(1, 2)), scaled_pm1(3),
            FiniteDist((-1, 0, 1), (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4))),
            FiniteDist((-3, 1), (Fraction(1, 4), Fraction(3, 4)))]
    return [pool[int(rs.integers(0, len(pool)))] for _ in range(n)]


@_timed
def criterion3(quick=False, seed=0):
    rs = np.random.default_rng([seed, 3])
    top = 8 if quick else 12
    mismatches, cases = [], 0
    for n in range(1, top + 1):
        for label in ("unit", "mixed"):
            if label == "unit":
                dists = [scaled_pm1(1)] * n
            else:
                dists = _mixed_dists(n, rs)
                # keep the enumeration near 2^12 points
                while math.prod(len(d.values) for d in dists) > 1 << 13:
                    dists = _mixed_dists(n, rs)
            brute = brute_second_moments(dists)
            var = [d.variance for d in dists]
            for ell in range(n + 1):
                cases += 1
                if tailbounds.exact_second_moment(var, ell).exact != brute[ell]:
                    mismatches.append([n, label, ell])
    return CriterionResult(3, "second-moment oracle vs enumeration",
                           not mismatches,
                           {"max_n": top, "cases": cases, "mismatches": mismatches},
                           time_budget=60)


# --- 4: tail bound grid ---------------------------------------------------------------

SIGMAS = (0.2, 0.05, 0.01)
TS = (1.5, 2, 4)
KS = (2, 3, 5)
NS = (10, 20, 40)


def grid_coordinates(sigma, n):
    """n equal ±s coordinates with aggregate standard deviation sigma."""
    return [scaled_pm1(Fraction(sigma / math.sqrt(n)))] * n


@_timed
def criterion4(quick=False, seed=0, workers=1):
    trials = 10_000 if quick else 100_000
    cells, failures = [], []
    for sigma, t, k, n in itertools.product(SIGMAS, TS, KS, NS):
        q = tailbounds.TailQuery(k, t, trials, "kwise", seed)
        rep = tailbounds.mc_tail_experiment(q, grid_coordinates(sigma, n), workers)
        cell = {"sigma": sigma, "t": t, "k": k, "n": n, "wise": rep.parameters["wise"],
                "successes": rep.successes, "ci_low": rep.ci_low,
                "bound": rep.reference, "flagged": rep.flagged_trial_count,
                "precondition": rep.extra["preconditions"]["thm15_precondition"]}
        cells.append(cell)
        if rep.ci_low > rep.reference:
            failures.append(cell)
    return CriterionResult(4, "tail grid under (2k+2)-wise samplers",
                           not failures,
                           {"trials_per_cell": trials, "cells": cells,
                            "failures": failures},
                           time_budget=1800)


# --- 5: lower-bound construction ---------------------------------------------------------


def enumerable_lower_bound_cases(quick=False):
    limit = 1 << (16 if quick else 24)
    out = []
    for n in (2, 3, 4, 6, 8, 16):
        for k in range(1, 12):
            spec, _ = kwise.lower_bound_sampler(n, k)
            if spec.support_size <= limit:
                out.append((n, k))
    return out


@_timed
def criterion5(quick=False, seed=0):
    rows, eq_fail = [], []
    for n, k in enumerable_lower_bound_cases(quick):
        rep = tailbounds.lower_bound_experiment(n, k, min(n, 1))
        row = {"n": n, "k": k, "field_bits": rep.parameters["field_bits"],
               "all_ones": rep.exact["all_ones"], "floor": rep.exact["reference"],
               "rank_prediction": rep.exact["rank_prediction"],
               "equals_floor": rep.extra["all_ones_equals_floor"],
               "equals_rank_prediction": rep.extra["all_ones_equals_rank_prediction"]}
        rows.append(row)
        if not row["equals_floor"]:
            eq_fail.append([n, k])
    ladder = []
    for ell in range(17):
        rep = tailbounds.lower_bound_experiment(16, 1, ell)
        ladder.append({"ell": ell, "mean_abs": rep.extra["mean_abs"],
                       "cauchy_schwarz": rep.extra["cauchy_schwarz_bound"],
                       "exceeds": rep.extra["exceeds_cauchy_schwarz"],
                       "tail_prob": rep.exact["estimate"],
                       "tail_at_least_floor": rep.passed})
    midrange = [r["ell"] for r in ladder if r["exceeds"] and 3 <= r["ell"] <= 13]
    part1 = not eq_fail
    part2 = bool(midrange)
    return CriterionResult(5, "lower-bound construction",
                           part1 and part2,
                           {"all_ones_equals_floor": part1,
                            "equality_failures": eq_fail, "cases": rows,
                            "mean_exceeds_cauchy_schwarz": part2,
                            "exceeding_ell": midrange, "n16_k1": ladder},
                           time_budget=300)


# --- 6: product rule -------------------------------------------------------------------------


def random_bounded_spec(rs, max_sigma):
    """A random spec on [-1, 1] with sigma at most ``max_sigma``."""
    n = int(rs.integers(5, 9))
    target = float(rs.uniform(0.2, 1.0)) * max_sigma
    spread = target / math.sqrt(n)
    coords = []
    for _ in range(n):
        mu = Fraction(int(rs.integers(10, 19)), 20) * int(rs.choice([-1, 1]))
        room = min(1 - abs(mu), Fraction(spread).limit_denominator(400))
        d = max(Fraction(1, 400), room * Fraction(int(rs.integers(5, 11)), 10))
        if rs.random() < 0.5:
            coords.append(FiniteDist((mu - d, mu + d), (Fraction(1, 2),) * 2))
        else:
            w = d * Fraction(int(rs.integers(1, 4)), 3)
            coords.append(FiniteDist((mu - d, mu, mu + w),
                                     (Fraction(1, 4), Fraction(1, 2), Fraction(1, 4))))
    return products.BoundedVarSpec(tuple(coords))


def product_instances(count, seed=0):
    rs = np.random.default_rng([seed, 6])
    half = count // 2
    return ([random_bounded_spec(rs, 0.1) for _ in range(half)]
            + [random_bounded_spec(rs, 0.3) for _ in range(count - half)])


@_timed
def criterion6(quick=False, seed=0):
    count = 10 if quick else 50
    instances, bound_fail, trend_fail = [], [], []
    for j, spec in enumerate(product_instances(count, seed)):
        rep = products.product_error_ladder(spec, [1, 2, 3], seed=seed)
        errs = [r["error_exact"] for r in rep.extra["ladder"]]
        instances.append({"n": spec.n, "sigma": spec.sigma, "errors": errs,
                          "within_bound": rep.passed,
                          "decreasing": rep.extra["log_error_decreasing"]})
        if not rep.passed:
            bound_fail.append(j)
        if spec.sigma <= 0.1 and not rep.extra["log_error_decreasing"]:
            trend_fail.append(j)
    parity = products.parity_distribution(4)
    par_err = abs(products.exact_product_expectation(None, parity)
                  - math.prod(parity.means, start=Fraction(1)))
    par_ok = par_err == 1 and parity.independence_degree() == 3
    return CriterionResult(6, "product rule error ladder",
                           not bound_fail and not trend_fail and par_ok,
                           {"instances": instances, "bound_failures": bound_fail,
                            "trend_failures": trend_fail,
                            "parity_error": str(par_err),
                            "parity_independence": parity.independence_degree()},
                           time_budget=600)


# --- 7: GMR rectangles -------------------------------------------------------------------------


@_timed
def criterion7(quick=False, seed=0, workers=1):
    trials = 10_000 if quick else 1_000_000
    params = gmr.GmrParams(64, 256, 0.1, 4)
    battery = gmr.rectangle_battery(64, 256, 20, seed)
    rects = [r for _, r in battery]
    hybrids = tuple(range(params.T + 2))
    counts = gmr.battery_counts(params, rects, trials, seed, hybrids, workers)
    rows, rect_fail, hyb_fail = [], [], []
    for j, ((shape, rect), col) in enumerate(zip(battery, counts.T)):
        exact = float(gmr.rectangle_probability_exact(rect))
        ci = [wilson_interval(int(c), trials) for c in col]
        est = [int(c) / trials for c in col]
        ok = ci[0][0] - params.delta <= exact <= ci[0][1] + params.delta
        steps = []
        for L in range(params.T + 1):
            margin = (ci[L][1] - ci[L][0]) / 2 + (ci[L + 1][1] - ci[L + 1][0]) / 2
            d = abs(est[L] - est[L + 1])
            steps.append(d <= params.delta_prime + margin)
        rows.append({"shape": shape, "exact": exact, "counts": [int(c) for c in col],
                     "ok": ok, "hybrid_steps_ok": all(steps)})
        if not ok:
            rect_fail.append(j)
        if not all(steps):
            hyb_fail.append(j)
    return CriterionResult(7, "GMR rectangle battery and hybrids",
                           not rect_fail and not hyb_fail,
                           {"trials": trials, "schedule": params.to_dict(),
                            "rectangles": rows, "rect_failures": rect_fail,
                            "hybrid_failures": hyb_fail},
                           time_budget=7200)


# --- 8: min-wise -----------------------------------------------------------------------------------


@_timed
def criterion8(quick=False, seed=0, workers=1):
    mism = []
    for m in range(1, 7):
        for s in range(0, 5):
            for ell in range(0, s + 1):
                if (minwise.exact_uniform_minima_prob(s, ell, m)
                        != minwise.brute_force_minima_prob(s, ell, m)):
                    mism.append([m, s, ell])
    trials = 10_000 if quick else 200_000
    fam = minwise.make_family("gmr", 8, 16, seed=seed, delta=0.1)
    tests = []
    for T in ((3,), (5, 1)):
        q = minwise.MinwiseQuery(range(8), T, 16)
        rep = minwise.minwise_test(fam, q, trials, workers)
        tests.append({"T": list(T), "successes": rep.successes,
                      "reference": rep.exact["reference"],
                      "tolerance": rep.parameters["tolerance"], "pass": rep.passed})
    return CriterionResult(8, "min-wise oracle and GMR minima events",
                           not mism and all(t["pass"] for t in tests),
                           {"oracle_mismatches": mism, "trials": trials,
                            "gmr_tests": tests},
                           time_budget=1200)


# --- 9: determinism ---------------------------------------------------------------------------------


PARALLEL = {4: criterion4, 7: criterion7, 8: criterion8}
SERIAL = {1: criterion1, 2: criterion2, 3: criterion3, 5: criterion5, 6: criterion6}


def run_criterion(number, quick=False, seed=0, workers=1):
    if number in PARALLEL:
        return PARALLEL[number](quick=quick, seed=seed, workers=workers)
    if number in SERIAL:
        return SERIAL[number](quick=quick, seed=seed)
    if number == 9:
        return criterion9(seed=seed)
    raise ValueError(f"no criterion {number}")


def quick_suite_bodies(seed=0, workers=1):
    return json.dumps([run_criterion(c, True, seed, workers).body()
                       for c in range(1, 9)], sort_keys=True)


@_timed
def criterion9(quick=True, seed=0, worker_counts=(1, 4, 16)):
    texts = {w: quick_suite_bodies(seed, w) for w in worker_counts}
    ref = texts[worker_counts[0]]
    same = {str(w): t == ref for w, t in texts.items()}
    return CriterionResult(9, "byte-identical bodies across worker counts",
                           all(same.values()),
                           {"worker_counts": list(worker_counts), "identical": same,
                            "body_bytes": len(ref)})


def run_suite(quick=False, seed=0, workers=1, criteria=range(1, 10), progress=None):
    results = []
    for c in criteria:
        res = run_criterion(c, quick, seed, workers)
        results.append(res)
        if progress:
            progress(res)
    return results
