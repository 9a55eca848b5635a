"""Counter-based pseudorandom words.

Every word is a pure function of ``(key, index, position)`` built from the
SplitMix64 finaliser, so any block of trial indices can be generated
independently and in any order.
"""

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def mix64_int(z):
    """SplitMix64 finaliser on a Python int."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix64(z):
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
        return z ^ (z >> np.uint64(31))


def derive_key(seed, *labels):
    """Fold integer or string labels into a 64-bit stream key."""
    key = mix64_int(int(seed) & MASK64)
    for label in labels:
        if isinstance(label, str):
            value = int.from_bytes(label.encode(), "little")
        else:
            value = int(label)
        while True:
            key = mix64_int(key ^ (value & MASK64) ^ GOLDEN)
            value >>= 64
            if not value:
                break
    return key


def words(key, indices, width):
    """Return a ``(len(indices), width)`` uint64 array of stream words.

    Row ``r`` depends only on ``key`` and ``indices[r]``.
    """
    idx = np.asarray(indices, dtype=np.uint64).reshape(-1, 1)
    cols = np.arange(1, width + 1, dtype=np.uint64).reshape(1, -1)
    with np.errstate(over="ignore"):
        base = _mix64(np.uint64(key) + idx * np.uint64(GOLDEN))
        return _mix64(base + cols * np.uint64(GOLDEN))


def uniform01(key, indices, width):
    """Uniform doubles in [0, 1) with 53 random bits each."""
    w = words(key, indices, width)
    return (w >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def symbols(key, indices, width, size):
    """Uniform integers in ``range(size)``.

    Power-of-two sizes are exact (bit masking); other sizes carry a bias
    below ``size / 2**53``.
    """
    if size & (size - 1) == 0:
        return (words(key, indices, width) & np.uint64(size - 1)).astype(np.int64)
    return np.floor(uniform01(key, indices, width) * size).astype(np.int64)


def cell_words(key, indices, cells):
    """Words for arbitrary ``cells[r, j]`` of row ``indices[r]``.

    Agrees with ``words(key, indices, width)[r, c]`` at ``c = cells[r, j]``,
    so a truly random table can be read lazily at the cells a trial visits.
    """
    idx = np.asarray(indices, dtype=np.uint64).reshape(-1, 1)
    c = np.asarray(cells, dtype=np.uint64) + np.uint64(1)
    with np.errstate(over="ignore"):
        base = _mix64(np.uint64(key) + idx * np.uint64(GOLDEN))
        return _mix64(base + c * np.uint64(GOLDEN))
