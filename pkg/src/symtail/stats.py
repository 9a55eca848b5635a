"""Binomial confidence intervals."""

import math
from statistics import NormalDist

CONFIDENCE = 0.99


def z_value(confidence=CONFIDENCE):
    return NormalDist().inv_cdf(0.5 + confidence / 2)


def wilson_interval(successes, trials, confidence=CONFIDENCE):
    """Two-sided Wilson score interval for a binomial proportion."""
    if trials <= 0:
        return 0.0, 1.0
    if not 0 <= successes <= trials:
        raise ValueError(f"successes={successes} outside 0..{trials}")
    z = z_value(confidence)
    p = successes / trials
    denom = 1 + z * z / trials
    centre = (p + z * z / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z * z / (4 * trials * trials))
    half /= denom
    lo, hi = centre - half, centre + half
    # the score interval always contains 0 (resp. 1) when p is 0 (resp. 1)
    if successes == 0:
        lo = 0.0
    if successes == trials:
        hi = 1.0
    return max(0.0, lo), min(1.0, hi)


def wilson_halfwidth(p, trials, confidence=CONFIDENCE):
    """Largest distance from ``p`` to the ends of its Wilson interval."""
    lo, hi = wilson_interval(round(p * trials), trials, confidence)
    q = round(p * trials) / trials
    return max(q - lo, hi - q)
