"""Command-line entry point.

    favprop run <config-path | recipe-name> [--seed S] [--out DIR] [--threads N]
    favprop recipes
    favprop explain <recipe>

Exit codes: 0 all verdicts pass, 1 a verdict failed (or a sampled ensemble
broke an estimator's hypothesis), 2 configuration or I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from .config import parse_config
from .errors import ConfigurationError, HypothesisViolation
from .recipes import RECIPES, list_recipes, recipe_text
from .runner import run_experiment

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _load(target: str):
    path = Path(target)
    if path.is_file():
        return parse_config(path.read_text())
    if target in RECIPES:
        return parse_config(recipe_text(target))
    raise ConfigurationError(f"{target}: no such config file or recipe")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="favprop", description=__doc__.split("\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a config file or a built-in recipe")
    run.add_argument("config", help="path to a TOML config, or a recipe name")
    run.add_argument("--seed", type=int, help="override master_seed")
    run.add_argument("--out", help="output directory")
    run.add_argument("--threads", type=int, default=1, help="worker threads (results identical)")

    sub.add_parser("recipes", help="list built-in recipes")
    explain = sub.add_parser("explain", help="print a recipe's config")
    explain.add_argument("recipe")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")

    if args.command == "recipes":
        for name, desc in list_recipes().items():
            print(f"{name:24s} {desc}")
        return EXIT_OK
    if args.command == "explain":
        try:
            print(recipe_text(args.recipe), end="")
        except ConfigurationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK

    try:
        config = _load(args.config)
        if args.seed is not None:
            if not 0 <= args.seed < 2 ** 64:
                raise ConfigurationError("--seed must be a 64-bit unsigned integer")
            config = replace(config, master_seed=args.seed)
        result = run_experiment(config, args.out, workers=args.threads)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisViolation as exc:
        print(f"hypothesis violated: {exc}", file=sys.stderr)
        return EXIT_FAIL

    for label, ok in result.verdicts.items():
        print(f"{'PASS' if ok else 'FAIL'}  {label}")
    print(f"reports written to {result.out_dir}")
    return EXIT_OK if result.passed else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
