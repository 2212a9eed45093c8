"""Command line entry point: ``kljnlab <subcommand> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys

from kljnlab import harness
from kljnlab.claims import CLAIMS, claims_check, claims_table
from kljnlab.config import ConfigError, load_config

log = logging.getLogger("kljnlab")

RUNNERS = {
    "simulate-kljn": harness.simulate_kljn,
    "simulate-thermod": harness.simulate_thermod,
    "attack": harness.attack,
    "amplify": harness.amplify,
    "ber-curve": harness.ber_curve,
    "power-report": harness.power_report,
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="scenario TOML file (defaults built in)")
    p.add_argument("--seed", type=int, metavar="U64", help="master seed, overrides the config")
    p.add_argument("--out", metavar="DIR", default=".", help="output directory (default: .)")
    p.add_argument("--trials", type=int, metavar="N", help="Monte Carlo trials, overrides the config")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--append", action="store_true", help="append rows to existing output files")
    p.add_argument("--workers", type=int, default=1, help="worker threads (results do not depend on it)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kljnlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in RUNNERS:
        _common(sub.add_parser(name))
    p = sub.add_parser("claims-check", help="run the reproducibility checks; exit status = failures")
    _common(p)
    p.add_argument("--claim", action="append", choices=sorted(CLAIMS), help="run only this check (repeatable)")
    p.add_argument("--tolerance", type=float, help="override every check's tolerance")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = load_config(args.config, args.seed)
        if args.trials is not None:
            cfg = cfg.replace(trials=args.trials)
    except (ConfigError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2

    if args.command == "claims-check":
        results = claims_check(cfg, args.claim, args.tolerance, args.workers)
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.claim_id:<30} measured={r.measured:.6g} "
                  f"expected={r.expected:.6g} tol={r.tolerance:.3g} ({r.relation})")
        harness.write_tables([claims_table(results)], args.out, args.format, args.append)
        failed = sum(not r.passed for r in results)
        print(f"{len(results) - failed}/{len(results)} claims passed")
        return min(failed, 255)

    tables = RUNNERS[args.command](cfg, args.workers)
    for path in harness.write_tables(tables, args.out, args.format, args.append):
        log.info("wrote %s", path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
