"""Result rows, in-run checks and the three output files."""
from __future__ import annotations

import csv
import json
import math
import platform
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Iterable, List, Optional, Sequence

import numpy as np

from ..stats import median_interval, wilson_interval

SUMMARY_COLUMNS = ("scenario", "statistic", "t", "param", "estimate", "ci_low", "ci_high",
                   "n", "successes", "ks_stat", "chi2_p", "excluded", "pre_asymptotic", "extra")


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


@dataclass
class SummaryRow:
    """One statistic of one scenario at one ``t``.

    Proportions carry ``successes`` and a Wilson 95% interval; medians leave
    ``successes`` empty and use order statistics at Wilson ranks.  ``param``
    labels rows that are indexed by something other than ``t`` (``n=1000``).
    """

    scenario: str
    statistic: str
    t: Optional[float]
    estimate: float
    ci_low: float
    ci_high: float
    n: int
    successes: Optional[int] = None
    ks_stat: Optional[float] = None
    chi2_p: Optional[float] = None
    excluded: int = 0
    pre_asymptotic: bool = False
    param: str = ""
    extra: Dict[str, object] = field(default_factory=dict)
    seconds: float = 0.0

    def __post_init__(self):
        if not self.ci_low <= self.estimate <= self.ci_high:
            raise ValueError(f"{self.statistic}: interval [{self.ci_low}, {self.ci_high}] "
                             f"misses the estimate {self.estimate}")
        if self.successes is not None:
            if not 0 <= self.ci_low <= self.ci_high <= 1:
                raise ValueError(f"{self.statistic}: proportion interval outside [0, 1]")

    @classmethod
    def proportion(cls, scenario: str, statistic: str, t, successes: int, n: int, **kw):
        lo, hi = wilson_interval(successes, n)
        est = successes / n if n else math.nan
        if n == 0:
            lo, hi, est = 0.0, 1.0, 0.5
        return cls(scenario, statistic, t, est, min(lo, est), max(hi, est), n,
                   successes=int(successes), **kw)

    @classmethod
    def median(cls, scenario: str, statistic: str, t, values, **kw):
        values = np.asarray(values, dtype=float)
        med, lo, hi = median_interval(values)
        extra = dict(kw.pop("extra", {}))
        if values.size:
            q1, q3 = np.quantile(values, [0.25, 0.75])
            extra.setdefault("q25", float(q1))
            extra.setdefault("q75", float(q3))
        return cls(scenario, statistic, t, med, min(lo, med), max(hi, med), int(values.size),
                   extra=extra, **kw)

    @classmethod
    def point(cls, scenario: str, statistic: str, t, value: float, n: int = 1, **kw):
        return cls(scenario, statistic, t, value, value, value, n, **kw)

    @property
    def width(self) -> float:
        return self.ci_high - self.ci_low

    def wilson_consistent(self) -> bool:
        if self.successes is None:
            return True
        lo, hi = wilson_interval(self.successes, self.n)
        return math.isclose(lo, self.ci_low, abs_tol=1e-15) and \
            math.isclose(hi, self.ci_high, abs_tol=1e-15)

    def as_record(self) -> Dict[str, str]:
        values = {
            "scenario": self.scenario, "statistic": self.statistic, "t": self.t,
            "param": self.param, "estimate": self.estimate, "ci_low": self.ci_low,
            "ci_high": self.ci_high, "n": self.n, "successes": self.successes,
            "ks_stat": self.ks_stat, "chi2_p": self.chi2_p, "excluded": self.excluded,
            "pre_asymptotic": self.pre_asymptotic,
            "extra": json.dumps({k: _jsonable(v) for k, v in sorted(self.extra.items())},
                                sort_keys=True) if self.extra else "",
        }
        return {k: _fmt(v) for k, v in values.items()}


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        f = float(v)
        return f if math.isfinite(f) else repr(f)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    return v


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ScenarioResult:
    scenario: str
    rows: List[SummaryRow]
    detail: List[Dict[str, object]]
    checks: List[Check]
    exclusions: Dict[str, int] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def rows_for(self, statistic: str) -> List[SummaryRow]:
        return [r for r in self.rows if r.statistic == statistic]

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


# ---------------------------------------------------------------------------
# trend checks
# ---------------------------------------------------------------------------

def nondecreasing_within(rows: Sequence[SummaryRow], slack: float = 2.0) -> Check:
    """Each estimate may fall below its predecessor by at most ``slack``
    interval widths (the wider of the two adjacent intervals)."""
    bad = []
    for a, b in zip(rows, rows[1:]):
        allowed = slack * max(a.width, b.width)
        if b.estimate < a.estimate - allowed:
            bad.append(f"{a.t:g}->{b.t:g}: {a.estimate:.6g} -> {b.estimate:.6g} (slack {allowed:.3g})")
    name = f"{rows[0].statistic} non-decreasing" if rows else "empty trend"
    return Check(name, not bad, "; ".join(bad) or _trail(rows))


def strictly_decreasing(values: Sequence[float], labels: Sequence[str], name: str) -> Check:
    bad = [f"{labels[i]}->{labels[i + 1]}: {values[i]:.6g} -> {values[i + 1]:.6g}"
           for i in range(len(values) - 1) if not values[i + 1] < values[i]]
    trail = ", ".join(f"{l}: {v:.6g}" for l, v in zip(labels, values))
    return Check(name, not bad, "; ".join(bad) or trail)


def _trail(rows: Sequence[SummaryRow]) -> str:
    return ", ".join(f"{r.t:g}: {r.estimate:.6g}" for r in rows)


# ---------------------------------------------------------------------------
# output
# ---------------------------------------------------------------------------

def versions() -> Dict[str, str]:
    import numba
    import scipy
    from .. import __version__
    return {"traplab": __version__, "python": platform.python_version(),
            "numpy": np.__version__, "scipy": scipy.__version__, "numba": numba.__version__}


def write_summary(rows: Iterable[SummaryRow], path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=SUMMARY_COLUMNS, lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow(r.as_record())


def write_detail(detail: Sequence[Dict[str, object]], path) -> None:
    keys: List[str] = []
    for rec in detail:
        for k in rec:
            if k not in keys:
                keys.append(k)
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys, lineterminator="\n")
        w.writeheader()
        for rec in detail:
            w.writerow({k: _fmt(rec.get(k)) for k in keys})


def write_outputs(result: ScenarioResult, config, out_dir, wall_clock: float) -> Dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"summary": out / "summary.csv", "detail": out / "detail.csv", "meta": out / "meta.json"}
    write_summary(result.rows, paths["summary"])
    write_detail(result.detail, paths["detail"])
    meta = {
        "scenario": result.scenario,
        "config": config.to_dict(),
        "versions": versions(),
        "wall_clock_seconds": wall_clock,
        "row_seconds": [{"statistic": r.statistic, "t": r.t, "param": r.param, "seconds": r.seconds}
                        for r in result.rows],
        "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in result.checks],
        "exclusions": result.exclusions,
        "passed": result.passed,
    }
    with open(paths["meta"], "w") as fh:
        json.dump(meta, fh, indent=2, default=_jsonable)
    return paths
