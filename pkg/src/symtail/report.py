"""Experiment reports, run configuration and deterministic chunked execution."""

import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, MergeError
from .stats import CONFIDENCE, wilson_interval

CHUNK = 8192
SEED_ENV = "SYMTAIL_SEED"


def exact_str(x):
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def jsonable(obj):
    """Convert Fractions, numpy scalars and tuples to JSON-native values."""
    if isinstance(obj, Fraction):
        return exact_str(obj)
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    return obj


@dataclass
class ExperimentReport:
    """Outcome of one experiment.

    ``parameters["rule"]`` names the acceptance inequality so that merged
    reports can recompute their verdict from pooled counts:

    * ``"upper_bound"`` -- pass iff ``ci_low <= reference``
    * ``"two_sided"`` -- pass iff ``reference`` lies within
      ``parameters["tolerance"]`` of ``[ci_low, ci_high]``
    * ``"exact"`` -- verdict fixed by the producer, never recomputed
    """

    command: str
    parameters: dict
    estimate: float = None
    reference: float = None
    ci_low: float = None
    ci_high: float = None
    verdict: str = "pass"
    trials: int = 0
    successes: int = 0
    flagged_trial_count: int = 0
    wall_time: float = 0.0
    exact: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)

    @property
    def passed(self):
        return self.verdict == "pass"

    def aliases(self):
        """Extra top-level names some command families expose."""
        if self.command == "tailbound":
            return {"threshold": self.parameters.get("threshold"),
                    "bound": self.reference, "empirical": self.estimate,
                    "flagged_trials": self.flagged_trial_count}
        return {}

    def to_dict(self):
        d = jsonable(asdict(self))
        d.update(jsonable(self.aliases()))
        return d

    def body(self):
        """Everything except wall-clock time."""
        d = self.to_dict()
        d.pop("wall_time")
        return d

    def to_json(self, body_only=False):
        return json.dumps(self.body() if body_only else self.to_dict(),
                          indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def write(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json() + "\n")


def finalize_binomial(report, confidence=CONFIDENCE):
    """Fill estimate, CI, exact strings and verdict from the counts."""
    t, s = report.trials, report.successes
    report.estimate = s / t if t else 0.0
    report.ci_low, report.ci_high = wilson_interval(s, t, confidence)
    if t:
        report.exact["estimate"] = exact_str(Fraction(s, t))
    rule = report.parameters.get("rule", "exact")
    if rule == "upper_bound":
        report.verdict = "pass" if report.ci_low <= report.reference else "fail"
    elif rule == "two_sided":
        tol = report.parameters.get("tolerance", 0.0)
        ok = report.ci_low - tol <= report.reference <= report.ci_high + tol
        report.verdict = "pass" if ok else "fail"
    return report


def _merge_extra(dicts):
    keys = set().union(*dicts)
    out = {}
    for key in sorted(keys):
        if any(key not in d for d in dicts):
            continue
        vals = [d[key] for d in dicts]
        if key.endswith("_count"):
            out[key] = sum(vals)
        elif key.startswith("max_"):
            out[key] = max(vals)
        elif key.startswith("min_"):
            out[key] = min(vals)
        elif all(v == vals[0] for v in vals):
            out[key] = vals[0]
    return out


def _merge_ranges(ranges):
    ranges = sorted(tuple(r) for r in ranges)
    out = []
    for lo, hi in ranges:
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return out


def merge_reports(reports):
    """Pool reports of one command family (associative, order-free)."""
    reports = list(reports)
    if not reports:
        raise MergeError("nothing to merge")
    commands = {r.command for r in reports}
    if len(commands) != 1:
        raise MergeError(f"cannot merge different families {sorted(commands)}")

    def strip(p):
        return {k: v for k, v in p.items() if k != "trial_ranges"}

    base = strip(reports[0].parameters)
    if any(strip(r.parameters) != base for r in reports[1:]):
        raise MergeError("parameters differ between reports")
    refs = {r.reference for r in reports}
    if len(refs) != 1:
        raise MergeError("reference values differ between reports")
    params = dict(base)
    ranges = [rg for r in reports for rg in r.parameters.get("trial_ranges", [])]
    if ranges:
        params["trial_ranges"] = _merge_ranges(ranges)
    merged = ExperimentReport(
        command=reports[0].command,
        parameters=params,
        reference=reports[0].reference,
        trials=sum(r.trials for r in reports),
        successes=sum(r.successes for r in reports),
        flagged_trial_count=sum(r.flagged_trial_count for r in reports),
        wall_time=max(r.wall_time for r in reports),
        extra=_merge_extra([r.extra for r in reports]),
        warnings=sorted({w for r in reports for w in r.warnings}),
    )
    exact_keys = {k for r in reports for k in r.exact if k != "estimate"}
    for k in sorted(exact_keys):
        vals = {r.exact.get(k) for r in reports}
        if len(vals) == 1:
            merged.exact[k] = vals.pop()
    if params.get("rule", "exact") == "exact":
        merged.verdict = ("pass" if all(r.passed for r in reports) else "fail")
        merged.estimate = reports[0].estimate if len(reports) == 1 else None
        merged.ci_low, merged.ci_high = reports[0].ci_low, reports[0].ci_high
        return merged
    return finalize_binomial(merged, params.get("confidence", CONFIDENCE))


@dataclass
class RunConfig:
    master_seed: int = 0
    workers: int = 1
    trials: int = None
    tolerances: dict = field(default_factory=dict)
    output: str = None

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigurationError("workers must be >= 1")

    @classmethod
    def from_env(cls, seed=0, **kw):
        env = os.environ.get(SEED_ENV)
        if env is not None:
            try:
                seed = int(env, 0)
            except ValueError:
                raise ConfigurationError(f"{SEED_ENV}={env!r} is not an integer") from None
        return cls(master_seed=seed, **kw)


def chunk_ranges(total, chunk=CHUNK):
    return [(s, min(total, s + chunk)) for s in range(0, total, chunk)]


def _call(args):
    fn, lo, hi = args
    return fn(lo, hi)


def run_chunks(fn, total, workers=1, chunk=CHUNK):
    """Apply ``fn(lo, hi)`` to fixed trial-index chunks and sum the results.

    ``fn`` returns a dict of integers or integer arrays. Chunk boundaries do
    not depend on ``workers`` and integer sums are exact, so the pooled
    result is identical for any worker count.
    """
    tasks = [(fn, lo, hi) for lo, hi in chunk_ranges(total, chunk)]
    if workers <= 1 or len(tasks) <= 1:
        parts = map(_call, tasks)
        return _sum_parts(parts)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return _sum_parts(pool.map(_call, tasks))


def _sum_parts(parts):
    total = {}
    for part in parts:
        for k, v in part.items():
            total[k] = total[k] + v if k in total else v
    return total


class Timer:
    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
