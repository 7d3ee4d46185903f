"""Goodness-of-fit and interval helpers used by tests and experiments."""
from __future__ import annotations

import math
from typing import Tuple

import numpy as np
from scipy import stats


def wilson_interval(successes: int, n: int, confidence: float = 0.95) -> Tuple[float, float]:
    if n <= 0:
        return 0.0, 1.0
    ci = stats.binomtest(int(successes), int(n)).proportion_ci(confidence, method="wilson")
    return float(ci.low), float(ci.high)


def median_interval(values, confidence: float = 0.95) -> Tuple[float, float, float]:
    """Sample median with a distribution-free interval.

    The interval is spanned by the order statistics at the ranks given by
    the Wilson interval for a proportion of 1/2.  Returns
    ``(median, low, high)``.
    """
    v = np.sort(np.asarray(values, dtype=float))
    n = v.size
    if n == 0:
        return math.nan, math.nan, math.nan
    lo_p, hi_p = wilson_interval(n // 2, n, confidence)
    i_lo = max(int(math.floor(lo_p * n)) - 1, 0)
    i_hi = min(int(math.ceil(hi_p * n)), n - 1)
    return float(np.median(v)), float(v[i_lo]), float(v[i_hi])


def geometric_exponential_ks(p: float, scale: float) -> float:
    """Exact sup distance between the laws of ``N/scale`` and Exp(1).

    ``N`` is geometric on {1, 2, ...} with success probability ``p``.  The
    scaled CDF jumps at ``k/scale``; the supremum is attained at a jump,
    on one side or the other.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    k_max = int(math.ceil(60.0 / p)) + 2
    k = np.arange(0, k_max + 1, dtype=float)
    geo = -np.expm1(k * math.log1p(-p))            # P(N <= k)
    expo = -np.expm1(-k / scale)                    # Exp(1) CDF at k/scale
    before = np.concatenate(([0.0], geo[:-1]))     # P(N <= k-1)
    return float(max(np.max(np.abs(geo - expo)), np.max(np.abs(before - expo))))


def geometric_bins(p: float, n: int, start: int = 1, min_expected: float = 5.0):
    """Cell edges for a chi-square test against Geometric(p) on {start, ...}.

    Returns ``(edges, probabilities)``: cell ``i`` is ``[edges[i], edges[i+1])``
    and the final cell is open-ended.
    """
    q = 1.0 - p
    edges = [start]
    probs = []
    k = start
    while True:
        cell = p * q ** (k - start)
        rest = q ** (k - start + 1)
        if n * cell < min_expected or n * rest < min_expected:
            break
        probs.append(cell)
        k += 1
        edges.append(k)
    probs.append(q ** (k - start))
    return np.asarray(edges), np.asarray(probs)


def chi2_geometric(samples, p: float, start: int = 1, min_expected: float = 5.0):
    """Chi-square goodness of fit of integer samples to Geometric(p) on {start, ...}.

    Returns ``(statistic, pvalue, n_cells)``.
    """
    x = np.asarray(samples, dtype=np.int64)
    if np.any(x < start):
        raise ValueError("samples fall outside the geometric support")
    edges, probs = geometric_bins(p, x.size, start, min_expected)
    idx = np.searchsorted(edges, x, side="right") - 1
    observed = np.bincount(idx, minlength=probs.size).astype(float)
    expected = probs * x.size
    res = stats.chisquare(observed, expected)
    return float(res.statistic), float(res.pvalue), int(probs.size)


def ks_exponential(samples) -> float:
    return float(stats.kstest(np.asarray(samples, dtype=float), "expon").statistic)


def ks_uniform(samples) -> float:
    return float(stats.kstest(np.asarray(samples, dtype=float), "uniform").statistic)


def total_variation(p, q) -> float:
    return 0.5 * float(np.sum(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))))
