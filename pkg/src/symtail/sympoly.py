"""Elementary symmetric polynomials and the inequalities they satisfy.

``S_k(a)`` is the sum over all k-element subsets of the product of the
chosen entries, i.e. the coefficient of x^k in prod(1 + a_i x). Two
evaluation modes are provided:

* ``"exact"`` -- rational arithmetic. Inputs are brought to a common
  denominator ``D`` and the coefficient recurrence runs on integers, so
  ``S_k = E_k / D^k`` with no rounding anywhere.
* ``"float"`` -- a batched, compensated (TwoSum/TwoProduct) recurrence
  that also reports when intermediate coefficients dwarf the final one.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import DegeneratePivotError, DomainError, InputError, ModeError

CANCELLATION_RATIO = 1e12
HOLDS_RTOL = 1e-9
PIVOT_RTOL = 1e-9
PIVOT_FLOOR = 1e-300
SIX_E = 6 * math.e

MODES = ("exact", "float")


def to_fraction(x):
    """Convert a number or a ``"p/q"`` string to a Fraction."""
    if isinstance(x, bool):
        raise ModeError(f"boolean is not a numeric entry: {x!r}")
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise InputError(f"non-finite entry {x!r}")
        return Fraction(x)
    if isinstance(x, np.floating):
        return to_fraction(float(x))
    if isinstance(x, np.integer):
        return Fraction(int(x))
    if isinstance(x, str):
        try:
            return Fraction(x.strip())
        except (ValueError, ZeroDivisionError):
            raise ModeError(f"not a rational literal: {x!r}") from None
    raise ModeError(f"cannot represent {x!r} exactly as a rational")


def to_float(x):
    if isinstance(x, str):
        x = to_fraction(x)
    try:
        v = float(x)
    except (TypeError, ValueError):
        raise InputError(f"not a real number: {x!r}") from None
    if not math.isfinite(v):
        raise InputError(f"non-finite entry {x!r}")
    return v


def as_vector(a, mode="exact"):
    """Validate ``a`` and return a tuple of Fractions or a float array."""
    if mode not in MODES:
        raise ModeError(f"mode must be one of {MODES}, got {mode!r}")
    if isinstance(a, np.ndarray) and a.ndim != 1:
        raise InputError("vector must be one-dimensional")
    if mode == "exact":
        return tuple(to_fraction(x) for x in a)
    return np.array([to_float(x) for x in a], dtype=np.float64)


@dataclass(frozen=True)
class SymmetricProfile:
    """S_0..S_n of one vector."""

    values: tuple
    mode: str
    condition_flag: bool = False
    # exact mode: S_k == numerators[k] / denominator**k
    numerators: tuple = field(default=None, repr=False, compare=False)
    denominator: int = field(default=None, repr=False, compare=False)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]

    @property
    def n(self):
        return len(self.values) - 1

    def get(self, k):
        """S_k, or zero when k exceeds the vector length."""
        if k < 0:
            raise DomainError(f"negative degree {k}")
        if k > self.n:
            return Fraction(0) if self.mode == "exact" else 0.0
        return self.values[k]

    def ratio(self, num_k, den_k, scale=1):
        """``scale * S_num_k / S_den_k`` as a correctly rounded float."""
        if num_k > self.n:
            return 0.0
        if self.mode == "exact":
            shift = num_k - den_k
            num = scale * self.numerators[num_k]
            den = self.numerators[den_k]
            if shift >= 0:
                den = den * self.denominator ** shift
            else:
                num = num * self.denominator ** (-shift)
            return num / den
        return scale * self.values[num_k] / self.values[den_k]

    def as_float(self, k):
        if k > self.n:
            return 0.0
        if self.mode == "exact":
            try:
                return self.numerators[k] / self.denominator ** k
            except OverflowError:
                return math.copysign(math.inf, self.numerators[k])
        return float(self.values[k])


def _exact_profile(fr):
    den = 1
    for x in fr:
        den = math.lcm(den, x.denominator)
    nums = [x.numerator * (den // x.denominator) for x in fr]
    c = [1] + [0] * len(nums)
    for i, v in enumerate(nums):
        if v == 0:
            continue
        for j in range(i + 1, 0, -1):
            c[j] += v * c[j - 1]
    values = []
    power = 1
    for e in c:
        values.append(Fraction(e, power))
        power *= den
    return SymmetricProfile(tuple(values), "exact", False, tuple(c), den)


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _split(a):
    c = 134217729.0 * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


def float_profiles(x, ratio=CANCELLATION_RATIO):
    """Batched compensated evaluation.

    ``x`` has shape ``(rows, n)``. Returns ``(values, peaks, flags)`` where
    ``values`` is ``(rows, n+1)``, ``peaks[r, k]`` is the largest magnitude
    coefficient k reached during the recurrence and ``flags[r, k]`` marks
    ``peaks > ratio * |values|`` (catastrophic cancellation).
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if not np.isfinite(x).all():
        raise InputError("non-finite entry in float input")
    rows, n = x.shape
    c = np.zeros((rows, n + 1))
    e = np.zeros((rows, n + 1))
    c[:, 0] = 1.0
    peaks = np.zeros((rows, n + 1))
    peaks[:, 0] = 1.0
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(n):
            xi = x[:, i:i + 1]
            p, pe = _two_prod(xi, c[:, :i + 1])
            s, se = _two_sum(c[:, 1:i + 2], p)
            e[:, 1:i + 2] = e[:, 1:i + 2] + xi * e[:, :i + 1] + pe + se
            c[:, 1:i + 2] = s
            np.maximum(peaks[:, 1:i + 2], np.abs(s), out=peaks[:, 1:i + 2])
        values = c + e
        # TwoProduct splitting overflows near 1e300; fall back to plain values
        bad = ~np.isfinite(values)
        values[bad] = c[bad]
    flags = peaks > ratio * np.abs(values)
    flags[:, 0] = False
    return values, peaks, flags


def elementary_profile(a, mode="exact", ratio=CANCELLATION_RATIO):
    """Return S_0(a), ..., S_n(a).

    >>> elementary_profile([2, 3]).values
    (Fraction(1, 1), Fraction(5, 1), Fraction(6, 1))
    """
    vec = as_vector(a, mode)
    if mode == "exact":
        return _exact_profile(vec)
    values, _, flags = float_profiles(vec.reshape(1, -1), ratio)
    return SymmetricProfile(tuple(float(v) for v in values[0]), "float",
                            bool(flags.any()))


def power_sum_e2(a, mode="exact"):
    """Sum of squares; equals S_1^2 - 2 S_2 (Newton's identity)."""
    vec = as_vector(a, mode)
    if mode == "exact":
        return sum((x * x for x in vec), Fraction(0))
    return float(np.dot(vec, vec))


def alternating_vector(n):
    """The vector with entries (-1)^i for i = 1..n."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return tuple((-1) ** i for i in range(1, n + 1))


# --- inequality checks ------------------------------------------------------


@dataclass(frozen=True)
class InequalityRecord:
    k: int
    lhs: float
    rhs: float
    slack: float
    holds: bool


@dataclass(frozen=True)
class InequalityReport:
    theorem: str
    mode: str
    records: tuple
    hypotheses_hold: bool = True
    hypotheses: dict = field(default_factory=dict)
    condition_flag: bool = False

    @property
    def holds(self):
        return self.hypotheses_hold and all(r.holds for r in self.records)

    @property
    def verdict(self):
        if not self.hypotheses_hold:
            return "hypothesis-violated"
        return "holds" if self.holds else "violated"

    @property
    def min_slack(self):
        return min((r.slack for r in self.records), default=0.0)

    def to_dict(self):
        return {
            "theorem": self.theorem,
            "mode": self.mode,
            "verdict": self.verdict,
            "holds": self.holds,
            "hypotheses_hold": self.hypotheses_hold,
            "hypotheses": dict(self.hypotheses),
            "condition_flag": self.condition_flag,
            "records": [
                {"k": r.k, "lhs": r.lhs, "rhs": r.rhs, "slack": r.slack,
                 "holds": r.holds}
                for r in self.records
            ],
        }


def _pow(base, k):
    try:
        return base ** k
    except OverflowError:
        return math.inf


def _record(k, lhs, rhs, rtol=HOLDS_RTOL):
    slack = rhs - lhs if math.isfinite(rhs) else math.inf
    return InequalityRecord(k, lhs, rhs, slack, slack >= -rtol * max(1.0, rhs))


def _profile(a, mode):
    if isinstance(a, SymmetricProfile):
        return a
    return elementary_profile(a, mode)


def theorem12_check(a, mode="exact"):
    """|S_k| <= (6e (S_1^2 + |S_2|)^(1/2) / k^(1/2))^k for every k in 1..n."""
    prof = _profile(a, mode)
    if prof.n < 1:
        raise DomainError("theorem12_check needs n >= 1")
    s1, s2 = prof.get(1), prof.get(2)
    scale = math.sqrt(float(s1 * s1 + abs(s2)))
    records = []
    for k in range(1, prof.n + 1):
        lhs = abs(prof.as_float(k))
        rhs = _pow(SIX_E * scale / math.sqrt(k), k)
        records.append(_record(k, lhs, rhs))
    return InequalityReport("12", prof.mode, tuple(records),
                            condition_flag=prof.condition_flag)


def minimal_theorem14_constant(profile, k):
    """Smallest C meeting both hypotheses at pivot k (None if S_k == 0)."""
    if profile.get(k) == 0:
        return None
    r1 = abs(profile.ratio(k + 1, k, k + 1))
    r2 = abs(profile.ratio(k + 2, k, math.comb(k + 2, k)))
    return max(r1, math.sqrt(r2))


def theorem14_check(a, k, C, mode="exact"):
    """Check the growth bound that follows from two consecutive small ratios.

    Given hypotheses ``|(k+1) S_{k+1}/S_k| <= C`` and
    ``|C(k+2,k) S_{k+2}/S_k| <= C^2``, every ``h`` in ``1..n-k`` must satisfy
    ``|C(k+h,k) S_{k+h}/S_k| <= (6eC/h^(1/2))^h``. When the hypotheses fail
    the report says so instead of raising.
    """
    prof = _profile(a, mode)
    if k < 0 or k > prof.n:
        raise DomainError(f"pivot k={k} outside 0..{prof.n}")
    if C < 0:
        raise DomainError(f"C must be non-negative, got {C}")
    pivot = prof.get(k)
    if prof.mode == "float":
        biggest = max(abs(v) for v in prof.values)
        if abs(pivot) <= PIVOT_FLOOR or abs(pivot) < PIVOT_RTOL * biggest:
            raise DegeneratePivotError(
                f"|S_{k}| = {abs(pivot):.3e} is numerically zero; "
                "rerun in exact mode")
    elif pivot == 0:
        return InequalityReport("14", prof.mode, (), False,
                                {"pivot_nonzero": False})
    r1 = abs(prof.ratio(k + 1, k, k + 1))
    r2 = abs(prof.ratio(k + 2, k, math.comb(k + 2, k)))
    tol = 1 + HOLDS_RTOL
    hyp = {
        "pivot_nonzero": True,
        "ratio1": r1,
        "ratio2": r2,
        "ratio1_ok": r1 <= C * tol,
        "ratio2_ok": r2 <= C * C * tol,
    }
    ok = hyp["ratio1_ok"] and hyp["ratio2_ok"]
    records = []
    for h in range(1, prof.n - k + 1):
        lhs = abs(prof.ratio(k + h, k, math.comb(k + h, k)))
        rhs = _pow(SIX_E * C / math.sqrt(h), h)
        records.append(_record(h, lhs, rhs))
    return InequalityReport("14", prof.mode, tuple(records), ok, hyp,
                            prof.condition_flag)


def maclaurin_check(a, mode="exact"):
    """S_k <= (e/k)^k S_1^k for non-negative inputs."""
    vec = as_vector(a, mode)
    if any(x < 0 for x in vec):
        raise DomainError("Maclaurin's bound needs non-negative entries")
    prof = _profile(vec if mode == "float" else list(vec), mode)
    s1 = float(prof.get(1))
    records = []
    for k in range(1, prof.n + 1):
        lhs = prof.as_float(k)
        rhs = _pow(math.e * s1 / k, k)
        records.append(_record(k, lhs, rhs))
    return InequalityReport("maclaurin", prof.mode, tuple(records),
                            condition_flag=prof.condition_flag)


def tightness_ratio(a, k):
    """|S_k| k^(k/2) / (S_1^2 + |S_2|)^(k/2), computed exactly then rounded."""
    prof = elementary_profile(a, "exact")
    s1, s2 = prof.get(1), prof.get(2)
    base = s1 * s1 + abs(s2)
    if base == 0:
        return math.nan
    log_ratio = (math.log(abs(prof.get(k))) if prof.get(k) else -math.inf)
    log_ratio += 0.5 * k * math.log(k) - 0.5 * k * math.log(base)
    return math.exp(log_ratio)
