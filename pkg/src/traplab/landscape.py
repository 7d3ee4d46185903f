"""Trap landscapes on the integers and the quantities derived from them.

A :class:`Landscape` is an i.i.d. field of trap depths ``sigma_z``, ``z`` in
Z, realized lazily.  Site ``z`` always draws the same uniform variate from a
Philox stream keyed by the landscape seed, so any site can be realized
without its neighbours and in any order.
"""
from __future__ import annotations

import csv
import functools
import math
import threading
from dataclasses import dataclass, field
from typing import Dict, Mapping, Optional, Tuple

import numpy as np

from .numerics import log_sum, safe_exp
from .tails import TailFunction

MASK64 = (1 << 64) - 1
# site z uses Philox output number z + _SITE_OFFSET
_SITE_OFFSET = 1 << 63
DEFAULT_SCAN_LIMIT = 10 ** 9
LEVEL_RTOL = 1e-12


class PreAsymptoticError(ValueError):
    """No admissible scaling value exists at this time; ``t`` is too small."""


class ScanBudgetExceeded(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# level l_t = min{s : s L(s) >= t}
# ---------------------------------------------------------------------------

def _check_time(t) -> float:
    t = float(t)
    if not (t > 0) or not math.isfinite(t):
        raise ValueError(f"time must be a finite positive number, got {t!r}")
    return t


@functools.lru_cache(maxsize=4096)
def level_bracket(tail: TailFunction, t: float, rtol: float = LEVEL_RTOL) -> Tuple[float, float]:
    """Bisection bracket ``(lo, hi)`` for the level at time ``t``.

    ``lo * L(lo) < t <= hi * L(hi)`` and ``hi - lo <= rtol * hi``.  Since
    ``L >= 1`` is non-decreasing the level lies in ``[t / L(t), t]``.
    """
    t = _check_time(t)
    hi = t
    lo = t / tail(t) * (1.0 - 2.0 ** -30)
    while hi - lo > rtol * hi:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if mid * tail(mid) >= t:
            hi = mid
        else:
            lo = mid
    return lo, hi


def level(tail: TailFunction, t: float) -> float:
    """The level ``l_t``: smallest ``s`` with ``s * L(s) >= t``."""
    return level_bracket(tail, float(t))[1]


# ---------------------------------------------------------------------------
# scaling function h_t
# ---------------------------------------------------------------------------

H_FLOOR = 2.0
# admissible h values are searched on this dyadic grid so that h_t is
# exactly non-decreasing in t
_H_GRID = 2.0 ** -20


@dataclass(frozen=True)
class Scaling:
    t: float
    h: float
    cap: float
    ell_t: float
    r_t: float
    clamped_by: Tuple[str, ...] = ()


def _h_violations(tail: TailFunction, ell: float, r: float, h: float) -> Tuple[str, ...]:
    bad = []
    if not tail(ell / h ** 3) > r * (1.0 - 1.0 / h):
        bad.append("lower")
    if not tail(ell * h ** 3) < r * (1.0 + 1.0 / h):
        bad.append("upper")
    if not h * h < r / 4.0:
        bad.append("growth")
    return tuple(bad)


@functools.lru_cache(maxsize=4096)
def scaling_info(tail: TailFunction, t: float) -> Scaling:
    """Scaling value at ``t`` together with the clamps that fired.

    The candidate ``max(2, ln ln t)`` is lowered to the largest admissible
    value (checked on a 2**-20 grid).  Admissible means
    ``L(l/h^3) > L(l)(1 - 1/h)``, ``L(l h^3) < L(l)(1 + 1/h)`` and
    ``h^2 < r_t / 4``.

    Raises
    ------
    PreAsymptoticError
        If not even ``h = 2`` is admissible.
    """
    t = _check_time(t)
    ell = level(tail, t)
    r = float(tail(ell))
    lnln = math.log(math.log(t)) if t > math.e else -math.inf
    cap = max(H_FLOOR, lnln)
    floor_bad = _h_violations(tail, ell, r, H_FLOOR)
    if floor_bad:
        raise PreAsymptoticError(
            f"t={t:g} is pre-asymptotic for {tail.name}: h=2 violates {', '.join(floor_bad)} "
            f"(r_t={r:.4g})")
    cap_bad = _h_violations(tail, ell, r, cap)
    if not cap_bad:
        return Scaling(t, cap, cap, ell, r)
    # largest admissible grid point in [2, cap); admissibility is monotone in h
    lo, hi = 0, int(math.ceil((cap - H_FLOOR) / _H_GRID))
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if _h_violations(tail, ell, r, H_FLOOR + mid * _H_GRID):
            hi = mid
        else:
            lo = mid
    return Scaling(t, H_FLOOR + lo * _H_GRID, cap, ell, r, cap_bad)


def scaling_function(tail: TailFunction, t: float) -> float:
    """Scaling value ``h_t >= 2``; see :func:`scaling_info`."""
    return scaling_info(tail, float(t)).h


# ---------------------------------------------------------------------------
# landscape
# ---------------------------------------------------------------------------

class Landscape:
    """Lazily realized i.i.d. trap depths on Z.

    Parameters
    ----------
    tail : TailFunction
    seed : int
        64-bit key of the Philox stream.
    block_size : int
        Sites realized per cache fill; a multiple of 4.  Does not affect the
        depths.
    pinned : mapping, optional
        ``{z: ln sigma_z}`` overriding the random depths at chosen sites, for
        constructed landscapes.  Pinned landscapes cannot be serialized.
    """

    def __init__(self, tail: TailFunction, seed: int, block_size: int = 512,
                 pinned: Optional[Mapping[int, float]] = None):
        if not 0 <= int(seed) <= MASK64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if block_size <= 0 or block_size % 4:
            raise ValueError("block_size must be a positive multiple of 4")
        self.tail = tail
        self.seed = int(seed)
        self.block_size = int(block_size)
        self._blocks: Dict[int, np.ndarray] = {}
        self._lock = threading.Lock()
        self.pinned = {int(z): float(v) for z, v in (pinned or {}).items()}
        if not all(math.isfinite(v) for v in self.pinned.values()):
            raise ValueError("pinned log-depths must be finite")

    def __repr__(self):
        return f"Landscape(tail={self.tail.name}, seed={self.seed})"

    # -- realization --------------------------------------------------------

    def _make_block(self, b: int) -> np.ndarray:
        first = b * self.block_size + _SITE_OFFSET
        gen = np.random.Generator(np.random.Philox(key=self.seed, counter=first // 4))
        u = gen.random(self.block_size) + 2.0 ** -54
        out = self.tail.log_inverse(1.0 / u)
        lo = b * self.block_size
        for z, v in self.pinned.items():
            if lo <= z < lo + self.block_size:
                out[z - lo] = v
        return out

    def _block(self, b: int) -> np.ndarray:
        arr = self._blocks.get(b)
        if arr is None:
            arr = self._make_block(b)
            with self._lock:
                arr = self._blocks.setdefault(b, arr)
        return arr

    @property
    def realized_range(self) -> Optional[Tuple[int, int]]:
        """Inclusive range of sites covered by realized blocks."""
        with self._lock:
            keys = list(self._blocks)
        if not keys:
            return None
        return min(keys) * self.block_size, (max(keys) + 1) * self.block_size - 1

    def log_sigma(self, z: int) -> float:
        b, off = divmod(int(z), self.block_size)
        return float(self._block(b)[off])

    def sigma(self, z: int) -> float:
        return safe_exp(self.log_sigma(z))

    def log_sigma_range(self, lo: int, hi: int) -> np.ndarray:
        """Log-depths of sites ``lo..hi`` inclusive."""
        lo, hi = int(lo), int(hi)
        if hi < lo:
            return np.empty(0)
        B = self.block_size
        b0, b1 = lo // B, hi // B
        parts = [self._block(b) for b in range(b0, b1 + 1)]
        flat = parts[0] if len(parts) == 1 else np.concatenate(parts)
        start = lo - b0 * B
        return flat[start:start + hi - lo + 1].copy()

    def sigma_range(self, lo: int, hi: int) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_sigma_range(lo, hi))

    def first_exceedance(self, start: int, step: int, log_level: float,
                         limit: int = DEFAULT_SCAN_LIMIT) -> int:
        """First site ``start, start+step, ...`` whose log-depth exceeds ``log_level``."""
        if step not in (1, -1):
            raise ValueError("step must be +1 or -1")
        B = self.block_size
        z = int(start)
        scanned = 0
        while scanned < limit:
            b, off = divmod(z, B)
            blk = self._block(b)
            seg = blk[off:] if step == 1 else blk[off::-1]
            hit = np.flatnonzero(seg > log_level)
            if hit.size:
                k = int(hit[0])
                if scanned + k >= limit:
                    break
                return z + step * k
            scanned += seg.size
            z += step * seg.size
        raise ScanBudgetExceeded(
            f"no trap above level exp({log_level:.6g}) within {limit} sites of {start}")

    # -- serialization --------------------------------------------------------

    def to_record(self) -> str:
        if self.pinned:
            raise ValueError("a landscape with pinned sites has no key-value record")
        d = self.tail.to_dict()
        lines = [f"family={d['family']}", f"beta={d.get('beta', '')}",
                 f"seed={self.seed}", f"x0={d['x0']}"]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_record(cls, text: str, **kwargs) -> "Landscape":
        d = {}
        for line in text.splitlines():
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, _, value = line.partition("=")
            d[key.strip()] = value.strip()
        tail = TailFunction.from_dict(d)
        if "x0" in d and not math.isclose(float(d["x0"]), tail.x0):
            raise ValueError(f"unsupported x0={d['x0']}")
        return cls(tail, int(d["seed"]), **kwargs)

    def write_csv(self, path, lo: int, hi: int) -> None:
        """Write sites ``lo..hi`` with columns ``z, sigma, log_sigma``."""
        logs = self.log_sigma_range(lo, hi)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z", "sigma", "log_sigma"])
            for z, ls in zip(range(lo, hi + 1), logs):
                w.writerow([z, repr(safe_exp(ls)), repr(float(ls))])


# ---------------------------------------------------------------------------
# localisation frame
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalisationFrame:
    """Everything the landscape determines at time ``t``.

    Depth-valued fields come in pairs: ``S_t`` may be ``inf`` when the sum
    overflows, ``log_S_t`` is always exact.  The ``h``-dependent fields are
    ``None`` when the frame was built without a scaling value.
    """

    t: float
    ell_t: float
    r_t: float
    z1: int
    z2: int
    log_sigma_z1: float
    log_sigma_z2: float
    log_S_t: float
    d_t: int
    log_m_t: float
    h_t: Optional[float] = None
    log_Sbar_t: Optional[float] = None
    event_A: Optional[bool] = None
    event_B: Optional[bool] = None
    event_C: Optional[bool] = None

    @property
    def gamma(self) -> Tuple[int, int]:
        return (self.z1, self.z2)

    @property
    def S_t(self) -> float:
        return safe_exp(self.log_S_t)

    @property
    def m_t(self) -> float:
        return safe_exp(self.log_m_t)

    @property
    def Sbar_t(self) -> Optional[float]:
        return None if self.log_Sbar_t is None else safe_exp(self.log_Sbar_t)

    @property
    def radius(self) -> Optional[float]:
        """``r_t / h_t``, the half-width of the confinement region."""
        return None if self.h_t is None else self.r_t / self.h_t

    @property
    def events(self) -> dict:
        return {"A": self.event_A, "B": self.event_B, "C": self.event_C}

    @property
    def all_events(self) -> Optional[bool]:
        if self.h_t is None:
            return None
        return bool(self.event_A and self.event_B and self.event_C)


def neighbourhood_offsets(radius: float) -> int:
    """Largest ``k`` with ``k < radius`` (sites with ``1 <= |z - y| < radius``)."""
    return max(int(math.ceil(radius)) - 1, 0)


def localisation_frame(landscape: Landscape, t: float, h: Optional[float] = None,
                       scan_limit: int = DEFAULT_SCAN_LIMIT) -> LocalisationFrame:
    """Build the :class:`LocalisationFrame` of ``landscape`` at time ``t``.

    Site 0 belongs to the negative scan, so ``z1 >= 1`` and ``z2 <= 0``.
    Pass ``h`` (e.g. from :func:`scaling_function`) to fill the
    neighbourhood sum and the three event flags.
    """
    t = _check_time(t)
    tail = landscape.tail
    ell = level(tail, t)
    r = float(tail(ell))
    log_ell = math.log(ell)
    z1 = landscape.first_exceedance(1, 1, log_ell, scan_limit)
    z2 = landscape.first_exceedance(0, -1, log_ell, scan_limit)
    ls1, ls2 = landscape.log_sigma(z1), landscape.log_sigma(z2)
    log_S = log_sum(landscape.log_sigma_range(z2 + 1, z1 - 1))
    d = max(abs(z1), abs(z2))
    log_m = min(ls1, ls2)
    if h is None:
        return LocalisationFrame(t, ell, r, z1, z2, ls1, ls2, log_S, d, log_m)

    h = float(h)
    k = neighbourhood_offsets(r / h)
    parts = []
    for zc in (z1, z2):
        if k:
            parts.append(landscape.log_sigma_range(zc - k, zc - 1))
            parts.append(landscape.log_sigma_range(zc + 1, zc + k))
    log_Sbar = log_sum(np.concatenate(parts)) if parts else -math.inf
    log_t, log_h = math.log(t), math.log(h)
    ev_A = log_S + math.log(d) < log_t - log_h
    ev_B = log_m > log_t + 2.0 * log_h - math.log(r)
    ev_C = log_Sbar < log_ell - log_h
    return LocalisationFrame(t, ell, r, z1, z2, ls1, ls2, log_S, d, log_m,
                             h, log_Sbar, bool(ev_A), bool(ev_B), bool(ev_C))
