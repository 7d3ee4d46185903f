"""Exact transient law of the trap model on a finite window.

Two independent routes are provided:

* :func:`pmf_at_times` -- uniformization with an a-priori Poisson tail bound;
* :func:`pmf_ode` -- direct integration of ``p' = Q^T p`` with a dense
  generator (small windows only).

Windows either leak into a cemetery at both ends (``"absorbing"``) or close
into a ring (``"periodic"``).
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats
from scipy.integrate import solve_ivp

from ._kernels import uniformized_sweep
from .landscape import Landscape

ABSORBING = "absorbing"
PERIODIC = "periodic"
DEFAULT_MAX_STEPS = 10 ** 9


class ToleranceUnachievable(RuntimeError):
    def __init__(self, k_required: int, max_steps: int):
        super().__init__(f"Poisson truncation needs {k_required} steps (> {max_steps})")
        self.k_required = k_required


class MonotonicityError(AssertionError):
    def __init__(self, i: int, values: Tuple[float, float], tol: float):
        super().__init__(f"return probability increased between grid points {i} and {i + 1}: "
                         f"{values[0]!r} -> {values[1]!r} (tol {tol:g})")
        self.pair = (i, i + 1)


def _check_boundary(boundary: str) -> str:
    b = boundary.lower()
    if b not in (ABSORBING, PERIODIC):
        raise ValueError(f"boundary must be {ABSORBING!r} or {PERIODIC!r}, got {boundary!r}")
    return b


@dataclass(frozen=True)
class TrapWindow:
    """Depths of the consecutive sites ``lo, lo+1, ..., lo+len(sigma)-1``."""

    lo: int
    sigma: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.sigma, dtype=float)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("window needs at least one site")
        if np.any(~(s > 0)):
            raise ValueError("trap depths must be positive")
        object.__setattr__(self, "sigma", s)

    @classmethod
    def from_landscape(cls, landscape: Landscape, lo: int, hi: int) -> "TrapWindow":
        return cls(int(lo), landscape.sigma_range(lo, hi))

    @property
    def hi(self) -> int:
        return self.lo + self.sigma.size - 1

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    @property
    def exit_rates(self) -> np.ndarray:
        """Total jump rate ``1/sigma_z`` (zero for overflowed depths)."""
        return 1.0 / self.sigma

    def index(self, z: int) -> int:
        i = int(z) - self.lo
        if not 0 <= i < self.sigma.size:
            raise IndexError(f"site {z} outside window [{self.lo}, {self.hi}]")
        return i


@dataclass
class PmfVector:
    """Law of ``X_t`` restricted to a window.

    For absorbing windows ``escaped_mass_bound`` is the mass that left the
    window; it bounds the truncation error of every entry from above.
    """

    lo: int
    boundary: str
    mass: np.ndarray
    escaped_mass_bound: float
    poisson_truncation_error: float
    t: float
    start: int
    Lambda: float
    k_truncation: int
    tol: float

    @property
    def hi(self) -> int:
        return self.lo + self.mass.size - 1

    @property
    def window(self) -> Tuple[int, int]:
        return self.lo, self.hi

    @property
    def sites(self) -> np.ndarray:
        return np.arange(self.lo, self.hi + 1)

    def __getitem__(self, z: int) -> float:
        i = int(z) - self.lo
        if 0 <= i < self.mass.size:
            return float(self.mass[i])
        return 0.0

    def total(self) -> float:
        return math.fsum(self.mass.tolist())

    def metadata(self) -> dict:
        return {"window": [self.lo, self.hi], "boundary": self.boundary, "t": self.t,
                "start": self.start, "Lambda": self.Lambda, "k_truncation": self.k_truncation,
                "tol": self.tol, "escaped_mass_bound": self.escaped_mass_bound,
                "poisson_truncation_error": self.poisson_truncation_error}

    def write(self, csv_path, json_path=None) -> None:
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["z", "p"])
            for z, p in zip(self.sites.tolist(), self.mass.tolist()):
                w.writerow([z, repr(p)])
        if json_path is not None:
            with open(json_path, "w") as fh:
                json.dump(self.metadata(), fh, indent=2)


def poisson_window(mean: float, tol: float) -> Tuple[int, np.ndarray, float]:
    """Smallest-ish index range holding all but ``tol`` of Poisson(mean).

    Returns ``(k_lo, weights, omitted_mass)`` with ``weights[i]`` the
    probability of ``k_lo + i``.
    """
    if mean == 0:
        return 0, np.ones(1), 0.0
    k_lo = int(stats.poisson.ppf(tol / 2, mean))
    k_hi = int(stats.poisson.isf(tol / 2, mean))
    omitted = float(stats.poisson.cdf(k_lo - 1, mean) + stats.poisson.sf(k_hi, mean))
    while omitted > tol:
        k_hi += 1
        omitted = float(stats.poisson.cdf(k_lo - 1, mean) + stats.poisson.sf(k_hi, mean))
    ks = np.arange(k_lo, k_hi + 1)
    return k_lo, stats.poisson.pmf(ks, mean), omitted


def pmf_at_times(window: TrapWindow, times: Sequence[float], boundary: str = ABSORBING,
                 tol: float = 1e-10, start: int = 0,
                 max_steps: int = DEFAULT_MAX_STEPS) -> List[PmfVector]:
    """Uniformization of the windowed chain at several times in one sweep.

    With ``Lambda = max_z 1/sigma_z`` the law at time ``t`` is
    ``sum_k Poisson(Lambda t; k) P^k p0`` where ``P = I + Q/Lambda``; the
    series is cut so the omitted Poisson mass is below ``tol``.
    """
    boundary = _check_boundary(boundary)
    if not 0 < tol <= 1e-2:
        raise ValueError("tol must lie in (0, 1e-2]")
    times = [float(t) for t in times]
    if any(not (t >= 0 and math.isfinite(t)) for t in times):
        raise ValueError("times must be finite and non-negative")
    if boundary == PERIODIC and window.sigma.size < 2:
        raise ValueError("a periodic window needs at least two sites")
    rates = window.exit_rates
    lam = float(rates.max())
    p0 = np.zeros(window.sigma.size)
    p0[window.index(start)] = 1.0

    rows = []
    for t in times:
        k_lo, w, omitted = poisson_window(lam * t, tol)
        if k_lo + w.size - 1 > max_steps:
            raise ToleranceUnachievable(k_lo + w.size - 1, max_steps)
        rows.append((k_lo, w, omitted))
    width = max(w.size for _, w, _ in rows)
    weights = np.zeros((len(rows), width))
    for j, (_, w, _) in enumerate(rows):
        weights[j, :w.size] = w
    k_lo = np.array([r[0] for r in rows], dtype=np.int64)
    n_w = np.array([r[1].size for r in rows], dtype=np.int64)
    out = np.zeros((len(rows), p0.size))
    escaped = np.zeros(len(rows))
    jump = rates / lam if lam > 0 else np.zeros_like(rates)
    uniformized_sweep(jump, p0, boundary == PERIODIC, k_lo, weights, n_w, out, escaped)
    np.clip(out, 0.0, None, out=out)

    return [PmfVector(window.lo, boundary, out[j], float(max(escaped[j], 0.0)), rows[j][2],
                      times[j], int(start), lam, int(k_lo[j] + n_w[j] - 1), tol)
            for j in range(len(rows))]


def pmf_at_time(window: TrapWindow, t: float, boundary: str = ABSORBING,
                tol: float = 1e-10, start: int = 0,
                max_steps: int = DEFAULT_MAX_STEPS) -> PmfVector:
    return pmf_at_times(window, [t], boundary, tol, start, max_steps)[0]


# ---------------------------------------------------------------------------
# dense generator, ODE route and equilibrium
# ---------------------------------------------------------------------------

def generator_matrix(sigma, boundary: str = PERIODIC) -> np.ndarray:
    """Dense generator ``Q[x, y] = w_{x->y}``.

    Absorbing windows get one extra, final cemetery state.
    """
    boundary = _check_boundary(boundary)
    s = np.asarray(sigma, dtype=float)
    n = s.size
    w = 0.5 / s
    if boundary == PERIODIC:
        if n < 2:
            raise ValueError("a periodic window needs at least two sites")
        Q = np.zeros((n, n))
        for x in range(n):
            Q[x, (x + 1) % n] += w[x]
            Q[x, (x - 1) % n] += w[x]
    else:
        Q = np.zeros((n + 1, n + 1))
        for x in range(n):
            Q[x, x + 1 if x + 1 < n else n] += w[x]
            Q[x, x - 1 if x > 0 else n] += w[x]
    Q[np.diag_indices_from(Q)] = -Q.sum(axis=1)
    return Q


def pmf_ode(window: TrapWindow, t: float, boundary: str = ABSORBING, start: int = 0,
            rtol: float = 1e-12, atol: float = 1e-15) -> Tuple[np.ndarray, float]:
    """Integrate the forward equation; returns ``(mass, escaped_mass)``."""
    Q = generator_matrix(window.sigma, boundary)
    p0 = np.zeros(Q.shape[0])
    p0[window.index(start)] = 1.0
    if t == 0:
        sol = p0
    else:
        QT = Q.T.copy()
        res = solve_ivp(lambda _, p: QT @ p, (0.0, float(t)), p0, method="DOP853",
                        rtol=rtol, atol=atol)
        if not res.success:
            raise RuntimeError(res.message)
        sol = res.y[:, -1]
    n = window.sigma.size
    return sol[:n].copy(), float(sol[n]) if sol.size > n else 0.0


def equilibrium_periodic(sigma) -> np.ndarray:
    """Stationary law of the ring: proportional to the depths."""
    s = np.asarray(sigma, dtype=float)
    if s.size < 2 or np.any(~(s > 0)) or not np.all(np.isfinite(s)):
        raise ValueError("need at least two finite positive depths")
    return s / math.fsum(s.tolist())


def detailed_balance_check(sigma, boundary: str = PERIODIC, rates: Optional[np.ndarray] = None,
                           tol: float = 1e-12) -> Tuple[bool, float]:
    """Check ``sigma_x w_{x->y} = sigma_y w_{y->x}`` over all site pairs.

    ``rates`` overrides the generator (off-diagonal entries are used).
    Returns ``(holds, max_violation)``.
    """
    s = np.asarray(sigma, dtype=float)
    n = s.size
    Q = generator_matrix(s, boundary) if rates is None else np.asarray(rates, dtype=float)
    Q = Q[:n, :n]
    flux = s[:, None] * Q
    off = ~np.eye(n, dtype=bool)
    viol = float(np.max(np.abs(flux - flux.T)[off])) if n > 1 else 0.0
    return viol <= tol, viol


def monotone_return_probability(sigma, start: int, t_grid: Sequence[float], tol: float = 1e-9,
                                pmf_tol: float = 1e-12) -> np.ndarray:
    """Return probabilities ``P(X_t = start)`` on a ring of the given depths.

    ``start`` is an index into ``sigma``.  Raises :class:`MonotonicityError`
    if the sequence increases by more than ``tol``, or AssertionError if it
    drops below the equilibrium mass of ``start`` by more than ``tol``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    window = TrapWindow(0, sigma)
    vecs = pmf_at_times(window, t_grid, PERIODIC, pmf_tol, start)
    p = np.array([v.mass[start] for v in vecs])
    for i in range(p.size - 1):
        if p[i + 1] > p[i] + tol:
            raise MonotonicityError(i, (p[i], p[i + 1]), tol)
    floor = equilibrium_periodic(window.sigma)[start]
    if p[-1] < floor - tol:
        raise AssertionError(f"return probability {p[-1]!r} fell below equilibrium {floor!r}")
    return p
