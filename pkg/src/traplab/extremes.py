"""Maxima, sums and first exceedences of i.i.d. slowly varying sequences."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .landscape import level, level_bracket, neighbourhood_offsets
from .numerics import log_sum, safe_exp
from .stats import geometric_exponential_ks, ks_exponential
from .tails import TailFunction

log = logging.getLogger(__name__)


def _open_uniform(rng: np.random.Generator, size) -> np.ndarray:
    return rng.random(size) + 2.0 ** -54


def sample_log_sequence(tail: TailFunction, size, rng: np.random.Generator) -> np.ndarray:
    """Log-values of i.i.d. draws with ``P(Y > x) = 1/L(x)``."""
    return tail.log_inverse(1.0 / _open_uniform(rng, size))


@dataclass
class SequencePanel:
    """A finite i.i.d. sequence ``Y_1..Y_n`` kept in log-space.

    ``log_M[k-1]`` and ``log_S[k-1]`` are the running maximum and running
    sum after ``k`` terms.
    """

    tail: TailFunction
    log_Y: np.ndarray

    def __post_init__(self):
        self.log_Y = np.asarray(self.log_Y, dtype=float)
        self.log_M = np.maximum.accumulate(self.log_Y)
        self.log_S = np.logaddexp.accumulate(self.log_Y)

    @classmethod
    def sample(cls, tail: TailFunction, n: int, rng: np.random.Generator) -> "SequencePanel":
        return cls(tail, sample_log_sequence(tail, n, rng))

    @property
    def n(self) -> int:
        return self.log_Y.size

    def first_exceedance(self, log_level: float) -> Optional[int]:
        """1-based index of the first term above ``exp(log_level)``."""
        hit = np.flatnonzero(self.log_Y > log_level)
        return int(hit[0]) + 1 if hit.size else None

    def exceedance_record(self, log_level: float, h: float) -> Optional["ExceedanceRecord"]:
        n_l = self.first_exceedance(log_level)
        if n_l is None:
            return None
        k = neighbourhood_offsets(float(self.tail.of_log(log_level)) / h)
        if n_l + k > self.n:
            return None
        return _record(self.log_Y, n_l, k)

    def log_excess(self, k: Optional[int] = None) -> float:
        """``ln(S_k / M_k - 1)``: the non-maximal terms relative to the maximum."""
        y = self.log_Y[: self.n if k is None else k]
        i = int(np.argmax(y))
        rest = np.delete(y, i)
        return log_sum(rest - y[i])


@dataclass(frozen=True)
class ExceedanceRecord:
    n_l: int
    log_s_l: float
    log_Y_nl: float
    log_sbar: float


def _record(log_Y: np.ndarray, n_l: int, k: int) -> ExceedanceRecord:
    i = n_l - 1
    before = log_Y[max(i - k, 0):i]
    after = log_Y[i + 1:i + 1 + k]
    return ExceedanceRecord(n_l, log_sum(log_Y[:i]), float(log_Y[i]),
                            log_sum(np.concatenate((before, after))))


def write_panel_stats(records: Sequence[ExceedanceRecord], csv_path, json_path=None,
                      log_values: bool = False, metadata: Optional[dict] = None) -> None:
    """Export exceedence records: columns ``trial, n_l, s_l, exceedence, sbar``.

    Depths easily overflow a float, so ``log_values=True`` writes natural
    logs instead; the JSON sidecar states which (``"scale"``).
    """
    conv = (lambda v: v) if log_values else safe_exp
    with open(csv_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["trial", "n_l", "s_l", "exceedence", "sbar"])
        for i, e in enumerate(records):
            w.writerow([i, e.n_l, repr(float(conv(e.log_s_l))), repr(float(conv(e.log_Y_nl))),
                        repr(float(conv(e.log_sbar)))])
    if json_path is not None:
        meta = dict(metadata or {})
        meta["scale"] = "log" if log_values else "linear"
        meta["trials"] = len(records)
        with open(json_path, "w") as fh:
            json.dump(meta, fh, indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# sum versus max
# ---------------------------------------------------------------------------

def _tail_gap(tail: TailFunction, log_m: float, log_excess: float) -> float:
    """``ln(L(S) - L(M))`` for ``S = M (1 + exp(log_excess))``."""
    if log_excess == -math.inf:
        return -math.inf
    if log_excess > -20:
        diff = tail.of_log(log_m + math.log1p(math.exp(log_excess))) - tail.of_log(log_m)
        return math.log(diff) if diff > 0 else -math.inf
    return tail.log_slope(log_m) + log_excess


def sum_max_gap(tail: TailFunction, n: int, rng: np.random.Generator, T: float = 1.0,
                grid: Optional[Sequence[float]] = None, log: bool = False) -> float:
    """``sup_s (L(S_{ns}) - L(M_{ns})) / n`` over ``s`` in ``grid``.

    ``grid`` defaults to 50 points spread evenly over ``[1/n, T]``.  With
    ``log=True`` the natural log of the gap is returned, which stays
    informative when the gap is far below float resolution.
    """
    if n < 1 or T <= 0:
        raise ValueError("need n >= 1 and T > 0")
    if grid is None:
        grid = np.linspace(1.0 / n, T, 50)
    horizon = int(math.floor(n * T))
    panel = SequencePanel.sample(tail, horizon, rng)
    best = -math.inf
    for s in grid:
        k = int(math.floor(n * s))
        if k < 1:
            continue
        lg = _tail_gap(tail, float(panel.log_M[k - 1]), panel.log_excess(k))
        best = max(best, lg)
    best -= math.log(n)
    if log:
        return best
    return math.exp(best) if best > -math.inf else 0.0


def sum_max_ratios(tail: TailFunction, n: int, panels: int, rng: np.random.Generator) -> np.ndarray:
    """``ln(S_n / M_n - 1)`` for ``panels`` independent sequences of length ``n``.

    ``S_n / M_n`` itself is ``1 + exp`` of these values; it rounds to 1.0
    long before the excess stops shrinking.
    """
    out = np.empty(panels)
    for i in range(panels):
        y = sample_log_sequence(tail, n, rng)
        j = int(np.argmax(y))
        out[i] = log_sum(np.delete(y, j) - y[j])
    return out


# ---------------------------------------------------------------------------
# first exceedence
# ---------------------------------------------------------------------------

@dataclass
class ExceedanceLaw:
    n_l: np.ndarray
    scale: float
    ks: float
    ks_bound: float

    @property
    def scaled(self) -> np.ndarray:
        return self.n_l / self.scale


def _first_exceedances(tail: TailFunction, log_level: float, trials: int,
                       rng: np.random.Generator, chunk: int) -> np.ndarray:
    out = np.zeros(trials, dtype=np.int64)
    pending = np.arange(trials)
    offset = np.zeros(trials, dtype=np.int64)
    while pending.size:
        block = sample_log_sequence(tail, (pending.size, chunk), rng) > log_level
        any_hit = block.any(axis=1)
        first = block.argmax(axis=1)
        done = pending[any_hit]
        out[done] = offset[done] + first[any_hit] + 1
        rest = pending[~any_hit]
        offset[rest] += chunk
        pending = rest
    return out


def first_exceedence_law(tail: TailFunction, trials: int, rng: np.random.Generator,
                         level_value: Optional[float] = None,
                         log_level: Optional[float] = None) -> ExceedanceLaw:
    """Simulated law of ``n_l / L(l)`` with its KS distance to Exp(1).

    Give the level either directly or as ``log_level``.  ``ks_bound`` is the
    exact KS distance between the (geometric) law of ``n_l / L(l)`` and
    Exp(1), the floor any sample KS statistic sits near.
    """
    if (level_value is None) == (log_level is None):
        raise ValueError("give exactly one of level_value and log_level")
    if log_level is None:
        log_level = math.log(level_value)
    scale = float(tail.of_log(log_level))
    if not 1.0 / scale < 0.1:
        raise ValueError(f"level too low: 1/L(l) = {1 / scale:.3g} must be below 0.1")
    n_l = _first_exceedances(tail, log_level, int(trials), rng, chunk=max(int(2 * scale), 16))
    scaled = n_l / scale
    return ExceedanceLaw(n_l, scale, ks_exponential(scaled), geometric_exponential_ks(1.0 / scale, scale))


# ---------------------------------------------------------------------------
# exceedence events at the level l_t
# ---------------------------------------------------------------------------

def exceedance_records(tail: TailFunction, log_level: float, h: float, trials: int,
                       rng: np.random.Generator, cap: Optional[int] = None):
    """Independent :class:`ExceedanceRecord` draws at one level.

    Each panel has length ``cap``; a panel whose first exceedence plus the
    neighbourhood radius does not fit is redrawn with a doubled cap.
    """
    scale = float(tail.of_log(log_level))
    k = neighbourhood_offsets(scale / h)
    cap = int(cap or max(8 * scale, 64)) + k
    records = []
    redraws = 0
    while len(records) < trials:
        panel = sample_log_sequence(tail, cap, rng)
        hit = np.flatnonzero(panel > log_level)
        if not hit.size or hit[0] + 1 + k > cap:
            redraws += 1
            cap *= 2
            continue
        records.append(_record(panel, int(hit[0]) + 1, k))
    if redraws:
        log.info("exceedance_records: %d panels redrawn, final cap %d", redraws, cap)
    return records


def exceedence_bounds(tail: TailFunction, t: float, h: float, trials: int,
                      rng: np.random.Generator, return_records: bool = False):
    """Frequencies of the three landscape inequalities at level ``l_t``.

    Keys: ``sum_half`` (``s < t/(2 r h^2)``), ``sum`` (``s < t/(r h^2)``),
    ``exceedance`` (``Y > t h^2 / r``), ``partial_sum``
    (``sbar < l_t / h^3``) and ``dominated`` (``s < Y``).  Each maps to
    ``{"successes", "n", "frequency"}``.  With ``return_records`` the
    underlying :class:`ExceedanceRecord` list comes back as well.
    """
    ell = level(tail, t)
    r = float(tail(ell))
    log_ell = math.log(ell)
    recs = exceedance_records(tail, log_ell, h, trials, rng)
    lt, lh, lr = math.log(t), math.log(h), math.log(r)
    checks = {
        "sum_half": lambda e: e.log_s_l < lt - math.log(2) - lr - 2 * lh,
        "sum": lambda e: e.log_s_l < lt - lr - 2 * lh,
        "exceedance": lambda e: e.log_Y_nl > lt + 2 * lh - lr,
        "partial_sum": lambda e: e.log_sbar < log_ell - 3 * lh,
        "dominated": lambda e: e.log_s_l < e.log_Y_nl,
    }
    out = {}
    for name, fn in checks.items():
        k = sum(1 for e in recs if fn(e))
        out[name] = {"successes": k, "n": len(recs), "frequency": k / len(recs)}
    if return_records:
        return out, recs
    return out


def ell_asymptotic_check(tail: TailFunction, t_grid: Sequence[float], eps: float = 0.05,
                         sandwich_rtol: float = 1e-10) -> np.ndarray:
    """Ratios ``l_t r_t / t`` along ``t_grid``.

    Asserts ``l_t L(l_t-) <= t <= l_t L(l_t)`` at every point and that the
    last ratio is within ``eps`` of 1.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be increasing")
    ratios = []
    for t in t_grid:
        lo, ell = level_bracket(tail, float(t))
        r = float(tail(ell))
        # lo is within 1e-12 of l_t from below, so L(lo) stands in for L(l_t-)
        # (exact when l_t sits on a jump of L)
        if not (ell * float(tail(lo)) <= t * (1 + sandwich_rtol) and t <= ell * r):
            raise AssertionError(f"level sandwich fails at t={t:g}")
        ratios.append(ell * r / t)
    ratios = np.asarray(ratios)
    if abs(ratios[-1] - 1.0) > eps:
        raise AssertionError(f"l_t r_t / t = {ratios[-1]:.6g} at t={t_grid[-1]:g}, not within {eps} of 1")
    return ratios
