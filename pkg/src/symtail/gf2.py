"""Arithmetic in the binary fields GF(2^b), 1 <= b <= 16.

Elements are integers whose bits are polynomial coefficients over GF(2).
Multiplication is carry-less multiplication reduced by a fixed irreducible
polynomial from :data:`IRREDUCIBLE`. That table is part of the public
interface: changing an entry changes every sampled bit.
"""

from functools import lru_cache

import numpy as np

from .errors import ConfigurationError

# Degree-b irreducible polynomials over GF(2), bit i = coefficient of x^i.
IRREDUCIBLE = {
    1: 0b11,  # x + 1
    2: 0b111,  # x^2 + x + 1
    3: 0b1011,  # x^3 + x + 1
    4: 0b10011,  # x^4 + x + 1
    5: 0b100101,  # x^5 + x^2 + 1
    6: 0b1000011,  # x^6 + x + 1
    7: 0b10000011,  # x^7 + x + 1
    8: 0x11B,  # x^8 + x^4 + x^3 + x + 1
    9: 0x211,  # x^9 + x^4 + 1
    10: 0x409,  # x^10 + x^3 + 1
    11: 0x805,  # x^11 + x^2 + 1
    12: 0x1053,  # x^12 + x^6 + x^4 + x + 1
    13: 0x201B,  # x^13 + x^4 + x^3 + x + 1
    14: 0x4443,  # x^14 + x^10 + x^6 + x + 1
    15: 0x8003,  # x^15 + x + 1
    16: 0x1100B,  # x^16 + x^12 + x^3 + x + 1
}

MAX_BITS = max(IRREDUCIBLE)


def clmul(a, b):
    """Carry-less product of two non-negative ints."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def poly_mod(a, modulus):
    """Remainder of ``a`` modulo ``modulus`` as GF(2)[x] polynomials."""
    deg = modulus.bit_length() - 1
    while a.bit_length() - 1 >= deg:
        a ^= modulus << (a.bit_length() - 1 - deg)
    return a


def gf_mul(a, b, bits):
    return poly_mod(clmul(a, b), IRREDUCIBLE[bits])


def field_info():
    """Rows describing the published irreducible table."""
    rows = []
    for bits, poly in sorted(IRREDUCIBLE.items()):
        terms = [f"x^{i}" if i > 1 else ("x" if i == 1 else "1")
                 for i in range(bits, -1, -1) if poly >> i & 1]
        rows.append({"bits": bits, "order": 1 << bits,
                     "modulus": hex(poly), "polynomial": " + ".join(terms),
                     "generator": BinaryField(bits).generator})
    return rows


class BinaryField:
    """GF(2^bits) with exp/log tables for vectorised multiplication."""

    def __init__(self, bits):
        if bits not in IRREDUCIBLE:
            raise ConfigurationError(
                f"field_bits must be in 1..{MAX_BITS}, got {bits}")
        self.bits = bits
        self.order = 1 << bits
        self.modulus = IRREDUCIBLE[bits]
        self.generator, self._exp, self._log = _tables(bits)

    def __repr__(self):
        return f"BinaryField(bits={self.bits})"

    def mul(self, x, y):
        """Elementwise product of integer arrays (or scalars)."""
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        prod = self._exp[self._log[x] + self._log[y]]
        return np.where((x == 0) | (y == 0), 0, prod)

    def horner(self, coeffs, points):
        """Evaluate polynomials at points.

        ``coeffs`` has shape ``(rows, k)`` with ``coeffs[:, j]`` the
        coefficient of x^j. ``points`` is either ``(n,)`` (shared by all
        rows) or ``(rows, n)``. Returns ``(rows, n)``.
        """
        coeffs = np.asarray(coeffs, dtype=np.int64)
        points = np.asarray(points, dtype=np.int64)
        if points.ndim == 1:
            points = np.broadcast_to(points, (coeffs.shape[0], points.shape[0]))
        acc = np.broadcast_to(coeffs[:, -1:], points.shape).copy()
        for j in range(coeffs.shape[1] - 2, -1, -1):
            acc = self.mul(acc, points) ^ coeffs[:, j:j + 1]
        return acc


@lru_cache(maxsize=None)
def _tables(bits):
    order = 1 << bits
    group = order - 1
    for g in range(1, order):
        exp = np.zeros(2 * group + 1, dtype=np.int64)
        x = 1
        ok = True
        for i in range(group):
            if i and x == 1:
                ok = False
                break
            exp[i] = x
            x = gf_mul(x, g, bits)
        if ok and x == 1:
            break
    else:  # pragma: no cover - every finite field has a generator
        raise ConfigurationError(f"no generator found for GF(2^{bits})")
    exp[group:2 * group] = exp[:group]
    log = np.zeros(order, dtype=np.int64)
    log[exp[:group]] = np.arange(group)
    # log[0] is a placeholder; products with zero are masked in mul().
    return g, exp, log
