"""`bench` command-line interface.

Subcommands: rastrigin | nn | ceiling | onn | scaling | popscan. Each takes
--config <file> plus optional --out <dir>, --seeds a,b,c, --mnist-dir <dir>
overrides. Exit code 0 only if every seed succeeded.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import List, Optional

from .config import ConfigError, load_config, parse_seeds
from .harness import run_experiment

SUBCOMMANDS = ("rastrigin", "nn", "ceiling", "onn", "scaling", "popscan")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bench",
        description="Run model-free optimization benchmark experiments.")
    sub = parser.add_subparsers(dest="kind", required=True)
    for kind in SUBCOMMANDS:
        p = sub.add_parser(kind, help=f"run a {kind} experiment")
        p.add_argument("--config", required=True,
                       help="experiment config file (INI sections or JSON)")
        p.add_argument("--out", default=None,
                       help="output directory (overrides the config)")
        p.add_argument("--seeds", default=None,
                       help="comma-separated seed list (overrides the config)")
        p.add_argument("--mnist-dir", default=None,
                       help="directory with the four canonical MNIST IDX files")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config)
        kind = cfg["experiment"].get("kind")
        if kind != args.kind:
            raise ConfigError(
                f"config is for kind={kind!r} but the subcommand is "
                f"{args.kind!r}")
        seeds = parse_seeds(args.seeds) if args.seeds else None
        summary = run_experiment(cfg, out_dir=args.out, seeds=seeds,
                                 mnist_dir=args.mnist_dir)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    if summary.get("failed"):
        print("one or more seeds failed; see summary.json", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
