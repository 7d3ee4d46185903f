"""Path simulation of the trap model and of the embedded simple random walk."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .landscape import Landscape, LocalisationFrame
from ._kernels import srw_exit
from .numerics import Neumaier

DEFAULT_JUMP_BUDGET = 10 ** 9


class JumpBudgetExceeded(RuntimeError):
    pass


@dataclass
class PathRecord:
    """One trajectory up to time ``t``.

    ``jump_sites[i]`` is the i-th visited site (``jump_sites[0]`` is the
    start) and ``hold_times[i]`` its completed sojourn; the sojourn in
    progress at time ``t`` is censored and not stored.  ``local_times``
    counts visits of the jump chain before the localisation set is hit.
    """

    t: float
    jump_sites: List[int]
    hold_times: List[float]
    total_time: float
    position_at_t: int
    local_times: Dict[int, int] = field(default_factory=dict)
    tau1: Optional[float] = None
    first_gamma_site: Optional[int] = None
    tau2: Optional[float] = None
    tau1_step: Optional[int] = None
    tau2_step: Optional[int] = None

    @property
    def n_jumps(self) -> int:
        return len(self.jump_sites) - 1

    def summary(self) -> dict:
        return {"t": self.t, "tau1": self.tau1, "tau2": self.tau2,
                "ybar": self.first_gamma_site, "x_t": self.position_at_t,
                "n_jumps": self.n_jumps}

    def write_csv(self, path) -> None:
        """Columns ``step, site, hold_time``; the censored last sojourn is blank."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "site", "hold_time"])
            for i, z in enumerate(self.jump_sites):
                w.writerow([i, z, repr(self.hold_times[i]) if i < len(self.hold_times) else ""])

    def write_summary(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)


class _SigmaCache:
    """Depths of a growing window of sites, fetched from the landscape."""

    def __init__(self, landscape: Landscape, center: int, half: int = 64):
        self.landscape = landscape
        self.lo = center - half
        self.values = landscape.sigma_range(self.lo, center + half).tolist()

    def get(self, z: int) -> float:
        i = z - self.lo
        if i < 0:
            grow = max(len(self.values), -i)
            self.values[:0] = self.landscape.sigma_range(self.lo - grow, self.lo - 1).tolist()
            self.lo -= grow
            i = z - self.lo
        elif i >= len(self.values):
            hi = self.lo + len(self.values)
            grow = max(len(self.values), i - len(self.values) + 1)
            self.values.extend(self.landscape.sigma_range(hi, hi + grow - 1).tolist())
        return self.values[i]


def simulate_to_time(landscape: Landscape, t: float, frame: Optional[LocalisationFrame],
                     rng: np.random.Generator, start: int = 0,
                     jump_budget: int = DEFAULT_JUMP_BUDGET) -> PathRecord:
    """Simulate the trap model from ``start`` until time ``t``.

    Holding times at ``z`` are exponential with mean ``sigma_z``, each jump
    goes to ``z +- 1`` with probability 1/2.  With a frame, also records the
    hitting time of the localisation set, the site hit, and the exit time of
    the region ``|z - ybar| < r_t/h_t`` (only events before ``t``).
    """
    t = float(t)
    if not t >= 0:
        raise ValueError("t must be non-negative")
    sig = _SigmaCache(landscape, start)
    gamma = set(frame.gamma) if frame is not None else set()
    radius = frame.radius if frame is not None else None

    sites = [start]
    holds: List[float] = []
    local: Dict[int, int] = {}
    clock = Neumaier()
    tau1 = ybar = tau2 = None
    tau1_step = tau2_step = None
    if start in gamma:
        tau1, ybar, tau1_step = 0.0, start, 0

    z = start
    chunk = 64
    expo = rng.standard_exponential(chunk)
    ups = rng.random(chunk) < 0.5
    j = 0
    n = 0
    while True:
        if j == chunk:
            expo = rng.standard_exponential(chunk)
            ups = rng.random(chunk) < 0.5
            j = 0
        hold = sig.get(z) * expo[j]
        now = clock.value
        if now + hold > t:
            break
        if n >= jump_budget:
            raise JumpBudgetExceeded(f"more than {jump_budget} jumps before t={t:g}")
        if tau1 is None:
            local[z] = local.get(z, 0) + 1
        now = clock.add(hold)
        z = z + 1 if ups[j] else z - 1
        j += 1
        n += 1
        holds.append(hold)
        sites.append(z)
        if tau1 is None:
            if z in gamma:
                tau1, ybar, tau1_step = now, z, n
        elif tau2 is None and radius is not None and abs(z - ybar) >= radius:
            tau2, tau2_step = now, n
    return PathRecord(t, sites, holds, clock.value, z, local if gamma else {},
                      tau1, ybar, tau2, tau1_step, tau2_step)


def sample_positions(landscape: Landscape, t: float, n_paths: int,
                     rng: np.random.Generator, start: int = 0,
                     jump_budget: int = DEFAULT_JUMP_BUDGET) -> np.ndarray:
    """Positions at time ``t`` of ``n_paths`` independent walks, vectorized."""
    half = 64
    lo = start - half
    sigma = landscape.sigma_range(lo, start + half)
    pos = np.full(n_paths, start, dtype=np.int64)
    clock = np.zeros(n_paths)
    active = np.ones(n_paths, dtype=bool)
    jumps = 0
    while active.any():
        idx = np.flatnonzero(active)
        p = pos[idx]
        if p.min() - lo < 1 or p.max() - lo > sigma.size - 2:
            grow = sigma.size
            sigma = np.concatenate([landscape.sigma_range(lo - grow, lo - 1), sigma,
                                    landscape.sigma_range(lo + sigma.size, lo + sigma.size + grow - 1)])
            lo -= grow
        hold = sigma[p - lo] * rng.standard_exponential(idx.size)
        done = clock[idx] + hold > t
        active[idx[done]] = False
        go = idx[~done]
        clock[go] += hold[~done]
        pos[go] += np.where(rng.random(go.size) < 0.5, 1, -1)
        jumps += go.size
        if jumps > jump_budget:
            raise JumpBudgetExceeded(f"more than {jump_budget} jumps in total")
    return pos


# ---------------------------------------------------------------------------
# simple random walk
# ---------------------------------------------------------------------------

def srw_hitting_probability(x: int, y: int) -> float:
    """Probability that the SRW from 0 hits ``x >= 1`` before ``y <= -1``."""
    x, y = int(x), int(y)
    if x < 1 or y > -1:
        raise ValueError("need x >= 1 and y <= -1")
    return -y / (x - y)


def srw_hitting_estimate(x: int, y: int, n_paths: int, rng: np.random.Generator):
    """Monte Carlo estimate of :func:`srw_hitting_probability`.

    Returns ``(estimate, standard_error)``.
    """
    srw_hitting_probability(x, y)
    pos = np.zeros(n_paths, dtype=np.int64)
    alive = np.arange(n_paths)
    hit_x = np.zeros(n_paths, dtype=bool)
    while alive.size:
        pos[alive] += np.where(rng.random(alive.size) < 0.5, 1, -1)
        p = pos[alive]
        hit_x[alive[p == x]] = True
        alive = alive[(p != x) & (p != y)]
    est = hit_x.mean()
    return float(est), float(math.sqrt(est * (1 - est) / n_paths))


@dataclass
class SrwExcursion:
    """SRW from 0 run until ``|D_n| >= level``; ``local_times`` over ``n < exit_step``."""

    level: int
    exit_step: int
    local_times: Dict[int, int]

    @property
    def max_local_time(self) -> int:
        return max(self.local_times.values())

    @property
    def origin_local_time(self) -> int:
        return self.local_times.get(0, 0)


def srw_excursion(level: int, rng: np.random.Generator) -> SrwExcursion:
    """Simple random walk from 0 until it first reaches ``+-level``."""
    level = int(level)
    if level < 1:
        raise ValueError("level must be a positive integer")
    counts = np.zeros(2 * level - 1, dtype=np.int64)   # sites -(level-1)..level-1
    steps = srw_exit(level, rng, counts)
    nz = np.flatnonzero(counts)
    return SrwExcursion(level, int(steps), {int(i) - level + 1: int(counts[i]) for i in nz})


def first_gamma_site_distribution(frame: LocalisationFrame) -> float:
    """Probability that the walk from 0 hits ``z1`` before ``z2``."""
    return abs(frame.z2) / (abs(frame.z1) + abs(frame.z2))
