"""Small numeric helpers shared across modules."""
from __future__ import annotations

import math

import numpy as np
# exp() of anything above this overflows float64
_LOG_FLOAT_MAX = math.log(np.finfo(float).max)


def log_sum(log_values) -> float:
    """``ln(sum(exp(log_values)))`` without overflow or underflow.

    Terms are sorted ascending, scaled by the largest one and summed with
    :func:`math.fsum`, so the result is compensated for any magnitudes.
    """
    lv = np.sort(np.asarray(log_values, dtype=float).ravel())
    if lv.size == 0 or lv[-1] == -np.inf:
        return -math.inf
    top = float(lv[-1])
    if top == math.inf:
        return math.inf
    return top + math.log(math.fsum(np.exp(lv - top).tolist()))


def safe_exp(log_value: float) -> float:
    """``exp`` returning ``inf`` instead of raising on overflow."""
    if log_value > _LOG_FLOAT_MAX:
        return math.inf
    return math.exp(log_value)


class Neumaier:
    """Running compensated sum (Kahan-Babuska-Neumaier)."""

    __slots__ = ("s", "c")

    def __init__(self, start: float = 0.0):
        self.s = float(start)
        self.c = 0.0

    def add(self, x: float) -> float:
        s = self.s
        t = s + x
        if not math.isfinite(t):
            self.s, self.c = t, 0.0
            return t
        if abs(s) >= abs(x):
            self.c += (s - t) + x
        else:
            self.c += (x - t) + s
        self.s = t
        return t + self.c

    @property
    def value(self) -> float:
        return self.s + self.c
