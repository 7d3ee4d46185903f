"""Command-line entry point: ``traplab <scenario> [options]``."""
from __future__ import annotations

import argparse
import logging
import sys
import time
from typing import Optional, Sequence

from .config import SCENARIOS, load_config
from .results import write_outputs
from .scenarios import run


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="traplab", description=__doc__)
    sub = parser.add_subparsers(dest="scenario", required=True)
    for name in SCENARIOS:
        p = sub.add_parser(name, help=f"run the {name} scenario")
        p.add_argument("--config", help="key-value config file")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out-dir", dest="out_dir", help="output directory")
        p.add_argument("--threads", type=int, help="worker threads")
        p.add_argument("--t", dest="t", type=float, action="append", help="time value (repeatable)")
        p.add_argument("--landscapes", type=int, help="landscapes (or panels) per t")
        p.add_argument("--paths", type=int, help="Monte Carlo paths per landscape")
        p.add_argument("--family", help="tail family")
        p.add_argument("--beta", type=float, help="logpower exponent")
        p.add_argument("--strict", action="store_true", default=None,
                       help="exclude pre-asymptotic t instead of using h = 2")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config, args.scenario, seed=args.seed, out_dir=args.out_dir,
                             threads=args.threads, t=tuple(args.t) if args.t else None,
                             landscapes=args.landscapes, paths=args.paths, family=args.family,
                             beta=args.beta, strict=args.strict)
    except (OSError, ValueError) as err:
        print(f"traplab: configuration error: {err}", file=sys.stderr)
        return 2
    start = time.perf_counter()
    result = run(config)
    wall = time.perf_counter() - start
    paths = write_outputs(result, config, config.out_dir, wall)
    for c in result.checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}  {c.detail}")
    print(f"{config.scenario}: {len(result.rows)} rows in {wall:.1f}s -> {paths['summary'].parent}")
    return 0 if result.passed else 1


if __name__ == "__main__":
    sys.exit(main())
