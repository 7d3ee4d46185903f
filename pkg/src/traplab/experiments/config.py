"""Experiment configuration and its key-value file grammar.

A config file holds one ``key = value`` pair per line; ``#`` starts a
comment and blank lines are ignored.  Recognised keys::

    scenario    = localise | split-law | gamma-scaling | events | extremes | pmf-check
    family      = log | logpower | expsqrtlog
    beta        = <float>                 # logpower only
    t           = <float>[, <float> ...]  # strictly increasing
    landscapes  = <int>
    paths       = <int>                   # Monte Carlo paths per landscape
    seed        = <int>
    threads     = <int>
    out_dir     = <path>
    window_c    = <float>                 # oracle window half-width / (d_t h_t)
    strict      = true | false            # drop pre-asymptotic t instead of using h = 2
    tol.<name>  = <float>                 # tolerance overrides, e.g. tol.pmf = 1e-10

Values given on the command line override the file.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

from ..tails import TailFunction

SCENARIOS = ("localise", "split-law", "gamma-scaling", "events", "extremes", "pmf-check")

DEFAULT_TOLERANCES = {
    "pmf": 1e-10,          # Poisson truncation of the oracle
    "window": 1e-6,        # accepted escaped mass of an oracle window
    "trend": 2.0,          # trend slack in interval half-widths
    "exclusion": 0.05,     # largest tolerated fraction of excluded landscapes
    "chi2_p": 1e-3,        # smallest accepted goodness-of-fit p-value
    "ode": 1e-8,           # uniformization vs ODE, per entry
    "tv": 0.02,            # Monte Carlo vs oracle total variation
}

_SCENARIO_DEFAULTS = {
    "localise": dict(family="expsqrtlog", t=(1e3, 1e4, 1e5, 1e6), landscapes=200),
    "split-law": dict(family="expsqrtlog", t=(1e3, 1e4, 1e5, 1e6), landscapes=200),
    "gamma-scaling": dict(family="log", t=(1e4, 1e6, 1e8), landscapes=10_000),
    "events": dict(family="expsqrtlog", t=(1e4, 1e6, 1e8), landscapes=1000),
    "extremes": dict(family="log", t=(1e4, 1e6, 1e8), landscapes=1000),
    "pmf-check": dict(family="expsqrtlog", t=(1.0, 10.0, 50.0), landscapes=1, paths=100_000),
}


@dataclass
class ExperimentConfig:
    scenario: str
    family: str = "expsqrtlog"
    beta: Optional[float] = None
    t: Tuple[float, ...] = ()
    landscapes: int = 200
    paths: int = 0
    seed: int = 0
    threads: int = 1
    out_dir: Path = Path("out")
    window_c: float = 4.0
    strict: bool = False
    tolerances: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ValueError(f"unknown scenario {self.scenario!r}")
        self.t = tuple(float(x) for x in self.t)
        self.out_dir = Path(self.out_dir)
        self.tolerances = {**DEFAULT_TOLERANCES, **self.tolerances}
        for name in ("landscapes", "threads"):
            if int(getattr(self, name)) < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.paths < 0 or self.seed < 0:
            raise ValueError("paths and seed must be non-negative")
        if not self.t:
            raise ValueError("at least one t value is required")
        if any(b <= a for a, b in zip(self.t, self.t[1:])):
            raise ValueError("t values must be strictly increasing")
        if any(x < 0 for x in self.t):
            raise ValueError("t values must be non-negative")
        self.tail  # validates family / beta

    @property
    def tail(self) -> TailFunction:
        return TailFunction(self.family, self.beta)

    def tol(self, name: str) -> float:
        return float(self.tolerances[name])

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["out_dir"] = str(self.out_dir)
        d["t"] = list(self.t)
        return d

    @classmethod
    def for_scenario(cls, scenario: str, **overrides) -> "ExperimentConfig":
        base = dict(_SCENARIO_DEFAULTS[scenario])
        base.update({k: v for k, v in overrides.items() if v is not None})
        return cls(scenario=scenario, **base)


def _parse_bool(text: str) -> bool:
    v = text.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def parse_config_text(text: str) -> dict:
    """Parse the key-value grammar into keyword arguments."""
    out: dict = {}
    tols: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key.startswith("tol."):
            tols[key[4:]] = float(value)
        elif key == "t":
            out["t"] = tuple(float(v) for v in value.replace(",", " ").split())
        elif key in ("landscapes", "paths", "seed", "threads"):
            out[key] = int(float(value)) if "e" in value.lower() else int(value)
        elif key in ("beta", "window_c"):
            out[key] = float(value)
        elif key == "strict":
            out[key] = _parse_bool(value)
        elif key in ("scenario", "family", "out_dir"):
            out[key] = value
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    if tols:
        out["tolerances"] = tols
    return out


def load_config(path, scenario: Optional[str] = None, **overrides) -> ExperimentConfig:
    kw = parse_config_text(Path(path).read_text()) if path else {}
    scen = scenario or kw.pop("scenario", None)
    kw.pop("scenario", None)
    if scen is None:
        raise ValueError("no scenario given")
    tols = {**kw.pop("tolerances", {}), **(overrides.pop("tolerances", None) or {})}
    kw.update({k: v for k, v in overrides.items() if v is not None})
    if tols:
        kw["tolerances"] = tols
    return ExperimentConfig.for_scenario(scen, **kw)
