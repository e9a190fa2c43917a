"""``regionscope`` command line.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import sys

from .errors import RegionScopeError
from .pipeline import STAGES, StageFailure, load_config, parse_override, run_pipeline

COMMANDS = ("ingest",) + STAGES + ("all",)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regionscope", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage" if name != "all" else "run every enabled stage")
        p.add_argument("--config", required=True, help="YAML or JSON run configuration")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--seed", type=int, help="permutation seed, unsigned 64-bit")
        p.add_argument("--threads", type=int, help="worker threads for permutation kernels")
        p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                       help="override a dotted config key, e.g. spatial.permutations=499")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    stage = "config"
    try:
        overrides = dict(parse_override(item) for item in args.overrides)
        for key in ("out", "seed", "threads"):
            value = getattr(args, key)
            if value is not None:
                overrides[key] = value
        cfg = load_config(args.config, overrides)
        targets = None if args.command == "all" else [args.command]
        result = run_pipeline(cfg, targets)
    except StageFailure as exc:
        print(f"regionscope: stage {exc.stage} failed: {exc}", file=sys.stderr)
        return exc.exit_code
    except RegionScopeError as exc:
        print(f"regionscope: stage {stage} failed: {exc}", file=sys.stderr)
        return exc.exit_code
    n = sum(len(v) for v in result.artifacts.values())
    print(f"wrote {n} files for {len(result.artifacts)} stages to {result.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
