"""Exactly k-wise independent vectors from random low-degree polynomials.

A support point is a polynomial ``p`` of degree < k over GF(2^b). Its
evaluations at the first n field elements (0, 1, ..., n-1) are uniform and
k-wise independent over GF(2^b); keeping the low ``log2(m)`` bits of each
evaluation gives k-wise independent symbols that are uniform on ``range(m)``.
For the ``"pm1"`` alphabet the single low bit is mapped 0 -> -1, 1 -> +1.

Support point ``j`` (``0 <= j < q**k``) is the polynomial whose coefficients
are the base-q digits of ``j``; point 0 is the zero polynomial. Random samples
pick a support point per trial index from a counter-based stream, so
``sample(spec, i)`` never depends on which other indices were drawn.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from . import rng
from .errors import ConfigurationError, EnumerationBudgetError
from .gf2 import MAX_BITS, BinaryField

DEFAULT_BUDGET = 1 << 24
PM1 = "pm1"


def _is_pow2(m):
    return isinstance(m, int) and m >= 1 and m & (m - 1) == 0


def min_field_bits(*sizes):
    """Smallest b >= 1 with 2^b >= every size."""
    need = max(max(sizes), 2)
    return max(1, (need - 1).bit_length())


@dataclass(frozen=True)
class KWiseSpec:
    """Parameters of one k-wise independent sampler.

    ``alphabet`` is ``"pm1"`` or a power-of-two alphabet size m. ``mask``
    (optional) is XORed into the symbol of each coordinate; for ``pm1`` a
    mask bit of 1 flips that coordinate's sign.
    """

    n: int
    k: int
    alphabet: object = PM1
    field_bits: int = None
    master_seed: int = 0
    mask: tuple = None

    def __post_init__(self):
        if self.field_bits is None:
            object.__setattr__(self, "field_bits",
                               min_field_bits(self.n, self.size))
        self.validate()

    @property
    def size(self):
        """Number of alphabet symbols."""
        return 2 if self.alphabet == PM1 else self.alphabet

    @property
    def q(self):
        return 1 << self.field_bits

    @property
    def support_size(self):
        return self.q ** self.k

    def validate(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ConfigurationError(f"n must be a positive int, got {self.n!r}")
        if not isinstance(self.k, int) or self.k < 1:
            raise ConfigurationError(f"k must be a positive int, got {self.k!r}")
        if self.alphabet != PM1 and not (_is_pow2(self.alphabet)
                                         and self.alphabet >= 2):
            raise ConfigurationError(
                f"alphabet must be 'pm1' or a power of two >= 2, "
                f"got {self.alphabet!r}")
        b = self.field_bits
        if not isinstance(b, int) or not 1 <= b <= MAX_BITS:
            raise ConfigurationError(f"field_bits must be in 1..{MAX_BITS}")
        if self.q < self.n:
            raise ConfigurationError(
                f"2^{b} = {self.q} field points cannot index n = {self.n}")
        if self.q < self.size:
            raise ConfigurationError(
                f"2^{b} = {self.q} is smaller than the alphabet {self.size}")
        if self.mask is not None:
            if len(self.mask) != self.n or any(
                    not 0 <= int(v) < self.size for v in self.mask):
                raise ConfigurationError("mask must hold n symbols")

    @property
    def gf(self):
        return _field(self.field_bits)

    @property
    def key(self):
        return rng.derive_key(self.master_seed, "kwise", self.n, self.k,
                              self.field_bits)

    def with_seed(self, seed):
        return replace(self, master_seed=seed)


_FIELDS = {}


def _field(bits):
    if bits not in _FIELDS:
        _FIELDS[bits] = BinaryField(bits)
    return _FIELDS[bits]


@dataclass(frozen=True)
class SampleBatch:
    """Rows of alphabet values plus where they came from."""

    rows: np.ndarray
    spec: KWiseSpec
    start: int
    stop: int

    def __len__(self):
        return len(self.rows)

    @property
    def provenance(self):
        return {"n": self.spec.n, "k": self.spec.k,
                "alphabet": self.spec.alphabet,
                "field_bits": self.spec.field_bits,
                "master_seed": self.spec.master_seed,
                "indices": [self.start, self.stop]}


# --- core maps ---------------------------------------------------------------


def _coefficients_random(spec, indices):
    w = rng.words(spec.key, indices, spec.k)
    return (w & np.uint64(spec.q - 1)).astype(np.int64)


def _coefficients_support(spec, start, stop):
    j = np.arange(start, stop, dtype=np.int64)
    q, b = spec.q, spec.field_bits
    cols = [(j >> (b * t)) & (q - 1) for t in range(spec.k)]
    return np.stack(cols, axis=1)


def symbols_from_coefficients(spec, coeffs, points=None):
    """Map polynomial coefficients to symbol rows in ``range(spec.size)``."""
    if points is None:
        points = np.arange(spec.n, dtype=np.int64)
    vals = spec.gf.horner(coeffs, points)
    sym = vals & (spec.size - 1)
    if spec.mask is not None:
        sym = sym ^ np.asarray(spec.mask, dtype=np.int64)
    return sym


def to_alphabet(spec, sym):
    if spec.alphabet == PM1:
        return (2 * sym - 1).astype(np.int8)
    return sym


def sample_symbols(spec, indices):
    """Symbol rows (``range(size)``-coded) for the given trial indices."""
    idx = np.atleast_1d(np.asarray(indices, dtype=np.int64))
    if (idx < 0).any():
        raise ConfigurationError("trial indices must be non-negative")
    return symbols_from_coefficients(spec, _coefficients_random(spec, idx))


def sample(spec, index):
    """One k-wise independent vector, a pure function of (spec, index)."""
    return to_alphabet(spec, sample_symbols(spec, [index]))[0]


def sample_batch(spec, start, count):
    idx = np.arange(start, start + count, dtype=np.int64)
    return SampleBatch(to_alphabet(spec, sample_symbols(spec, idx)),
                       spec, start, start + count)


def support_point(spec, j):
    """Alphabet vector of support point ``j`` (0 is the zero polynomial)."""
    if not 0 <= j < spec.support_size:
        raise ConfigurationError(f"support index {j} out of range")
    sym = symbols_from_coefficients(spec, _coefficients_support(spec, j, j + 1))
    return to_alphabet(spec, sym)[0]


def _check_budget(spec, budget):
    if spec.support_size > budget:
        raise EnumerationBudgetError(spec.support_size, budget)


def iter_support_symbols(spec, budget=DEFAULT_BUDGET, chunk=1 << 16):
    """Yield symbol-coded support rows in chunks, each point exactly once."""
    _check_budget(spec, budget)
    total = spec.support_size
    for start in range(0, total, chunk):
        stop = min(total, start + chunk)
        yield symbols_from_coefficients(
            spec, _coefficients_support(spec, start, stop))


def enumerate_support(spec, budget=DEFAULT_BUDGET):
    """Yield every support vector once (uniform weights) as alphabet rows."""
    for sym in iter_support_symbols(spec, budget):
        yield from to_alphabet(spec, sym)


def support_array(spec, budget=DEFAULT_BUDGET):
    """The whole support as one ``(q**k, n)`` alphabet array."""
    _check_budget(spec, budget)
    return np.concatenate([to_alphabet(spec, s)
                           for s in iter_support_symbols(spec, budget)])


# --- lower-bound construction ------------------------------------------------


def lower_bound_sampler(n, k):
    """A (2k+2)-wise independent ±1 sampler translated to contain all-ones.

    The zero polynomial yields all -1; the returned mask flips every sign so
    that support point 0 becomes (1, ..., 1). Returns ``(spec, mask)`` with
    ``spec.mask == mask``.
    """
    if n < 1 or k < 1:
        raise ConfigurationError("lower_bound_sampler needs n >= 1 and k >= 1")
    mask = (1,) * n
    spec = KWiseSpec(n=n, k=2 * k + 2, alphabet=PM1, mask=mask)
    return spec, mask


def low_bit_rank(spec):
    """Rank over GF(2) of the linear map from seed bits to output low bits.

    Every pattern in the image of the (unmasked) construction is hit by
    exactly ``2**(k*b - rank)`` seeds, so any fixed ±1 pattern in the image
    has probability ``2**-rank``.
    """
    F = spec.gf
    pts = np.arange(spec.n, dtype=np.int64)
    rows = []
    for j in range(spec.k):
        xj = np.ones(spec.n, dtype=np.int64)
        for _ in range(j):
            xj = F.mul(xj, pts)
        for r in range(spec.field_bits):
            bits = F.mul(np.full(spec.n, 1 << r), xj) & 1
            rows.append(int("".join(str(int(v)) for v in bits[::-1]), 2))
    return _gf2_rank(rows)


def _gf2_rank(rows):
    basis = {}
    for v in rows:
        while v:
            top = v.bit_length() - 1
            if top not in basis:
                basis[top] = v
                break
            v ^= basis[top]
    return len(basis)


# --- accounting --------------------------------------------------------------


@dataclass(frozen=True)
class SeedLength:
    bits: int
    reference: str

    def to_dict(self):
        return {"bits": self.bits, "reference": self.reference}


def seed_length(spec, eps=None):
    """Actual seed bits (k*b) and the optimal small-bias formula for context."""
    m = spec.size
    ref = (f"optimal (k,eps)-wise: O(log log n + k log m + log(1/eps)) "
           f"with n={spec.n}, k={spec.k}, m={m}, "
           f"eps={'0 (exact)' if eps is None else eps}; "
           f"log log n + k log2 m = "
           f"{math.log2(max(2.0, math.log2(max(spec.n, 2)))):.3g} + "
           f"{spec.k * math.log2(m):.3g}")
    return SeedLength(spec.k * spec.field_bits, ref)
