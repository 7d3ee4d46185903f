"""Slowly varying tail families for the trap distribution.

A tail is described through ``L(x) = 1 / P(sigma > x)``.  Three closed-form
families are provided; each is identically 1 below ``x0 = e``:

* ``log``:        ``L(x) = ln x``
* ``logpower``:   ``L(x) = (ln x) ** beta``
* ``expsqrtlog``: ``L(x) = exp(sqrt(ln x))``

Depths can be astronomically large (``sigma = exp(1/u)`` for the ``log``
family), so every routine has a log-space twin taking or returning
``ln x`` instead of ``x``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

X0 = math.e
LOG_X0 = 1.0


class Family(str, enum.Enum):
    LOG = "log"
    LOGPOWER = "logpower"
    EXPSQRTLOG = "expsqrtlog"

    @classmethod
    def parse(cls, name: str) -> "Family":
        key = name.strip().lower().replace("_", "").replace("-", "")
        for member in cls:
            if member.value == key:
                return member
        raise ValueError(f"unknown tail family {name!r}; expected one of "
                         f"{[m.value for m in cls]}")


@dataclass(frozen=True)
class TailFunction:
    """Closed-form ``L(x) = 1/P(sigma > x)`` for one of the supported families.

    Parameters
    ----------
    family : Family or str
        ``"log"``, ``"logpower"`` or ``"expsqrtlog"``.
    beta : float, optional
        Exponent of the ``logpower`` family; must be omitted otherwise.
    """

    family: Family
    beta: Optional[float] = None

    def __post_init__(self):
        family = Family.parse(self.family) if isinstance(self.family, str) \
            else Family(self.family)
        object.__setattr__(self, "family", family)
        if family is Family.LOGPOWER:
            if self.beta is None or not (self.beta > 0) or not math.isfinite(self.beta):
                raise ValueError("logpower family needs a finite beta > 0")
            object.__setattr__(self, "beta", float(self.beta))
        elif self.beta is not None:
            raise ValueError(f"beta is only meaningful for logpower, not {family.value}")

    @classmethod
    def log(cls) -> "TailFunction":
        return cls(Family.LOG)

    @classmethod
    def logpower(cls, beta: float) -> "TailFunction":
        return cls(Family.LOGPOWER, beta)

    @classmethod
    def expsqrtlog(cls) -> "TailFunction":
        return cls(Family.EXPSQRTLOG)

    @property
    def x0(self) -> float:
        return X0

    @property
    def name(self) -> str:
        if self.family is Family.LOGPOWER:
            return f"logpower({self.beta:g})"
        return self.family.value

    # -- evaluation -----------------------------------------------------

    def of_log(self, log_x):
        """``L(exp(log_x))``; accepts scalars or arrays, ``-inf`` allowed."""
        lx = np.asarray(log_x, dtype=float)
        above = lx >= LOG_X0
        safe = np.where(above, lx, LOG_X0)
        if self.family is Family.LOG:
            val = safe
        elif self.family is Family.LOGPOWER:
            val = safe ** self.beta
        else:
            val = np.exp(np.sqrt(safe))
        out = np.where(above, np.maximum(val, 1.0), 1.0)
        return float(out) if out.ndim == 0 else out

    def log_slope(self, log_x: float) -> float:
        """``ln dL/d(ln x)`` at ``ln x = log_x >= 1`` (``-inf`` below ``x0``)."""
        if log_x < LOG_X0:
            return -math.inf
        if self.family is Family.LOG:
            return 0.0
        if self.family is Family.LOGPOWER:
            return math.log(self.beta) + (self.beta - 1.0) * math.log(log_x)
        root = math.sqrt(log_x)
        return root - math.log(2.0 * root)

    def __call__(self, x):
        xa = np.asarray(x, dtype=float)
        with np.errstate(divide="ignore"):
            out = self.of_log(np.log(xa))
        return out

    def left_limit(self, x: float) -> float:
        """``L(x-)``.  Only ``expsqrtlog`` is discontinuous (at ``x0``)."""
        if x <= X0:
            return 1.0
        return float(self(x))

    # -- generalized inverse ---------------------------------------------

    def log_inverse(self, y):
        """``ln inf{x >= 0 : L(x) >= y}`` for ``y > 1``, vectorized.

        Every family has ``L(x0) >= 1`` with ``L = 1`` below ``x0``, so for
        ``y > 1`` the infimum is at least ``x0`` and the result is ``>= 1``.
        """
        ya = np.asarray(y, dtype=float)
        if np.any(~(ya > 1.0)):
            raise ValueError("log_inverse is defined here for y > 1 only")
        if self.family is Family.LOG:
            g = ya
        elif self.family is Family.LOGPOWER:
            g = ya ** (1.0 / self.beta)
        else:
            g = np.log(ya) ** 2
        out = np.maximum(g, LOG_X0)
        return float(out) if out.ndim == 0 else out

    def inverse(self, y) -> float:
        with np.errstate(over="ignore"):
            return np.exp(self.log_inverse(y))

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        d = {"family": self.family.value, "x0": repr(X0)}
        if self.beta is not None:
            d["beta"] = repr(self.beta)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TailFunction":
        beta = d.get("beta")
        return cls(Family.parse(d["family"]), None if beta in (None, "") else float(beta))


def _check_x(x: float) -> float:
    x = float(x)
    if math.isnan(x) or x < 0:
        raise ValueError(f"tail argument must be a non-negative number, got {x!r}")
    return x


def eval_tail(tail: TailFunction, x: float) -> float:
    """Return ``L(x)``; rejects NaN and negative input."""
    return float(tail(_check_x(x)))


def _check_u(u):
    ua = np.asarray(u, dtype=float)
    if np.any(~((ua > 0.0) & (ua < 1.0))):
        raise ValueError("uniform variates must lie in the open interval (0, 1)")
    return ua


def sample_log_trap(tail: TailFunction, u):
    """Log-depth ``ln sigma`` with ``sigma = inf{x : L(x) >= 1/u}``."""
    ua = _check_u(u)
    return tail.log_inverse(1.0 / ua)


def sample_trap(tail: TailFunction, u):
    """Inverse-CDF trap depth for uniform ``u`` in (0, 1).

    Returns ``inf`` when the depth is beyond float range; use
    :func:`sample_log_trap` for those.
    """
    with np.errstate(over="ignore"):
        out = np.exp(sample_log_trap(tail, u))
    return float(out) if np.ndim(out) == 0 else out


def survival(tail: TailFunction, x):
    """``P(sigma > x) = 1/L(x)``."""
    return 1.0 / np.asarray(tail(x))
