#!/usr/bin/env python3
"""
Benchmark CLI for the squirrel optimizer.

Usage
-----
Run squirrel on every built-in function over 20 seeds:
    python -m scripts.bench run --functions all --optimizer squirrel --seeds 0..19 --out results/squirrel.csv

Random-search baseline on two functions, four worker processes:
    python -m scripts.bench run --functions branin-2d,sphere-10d --optimizer random \
        --seeds 0..19 --workers 4 --out results/random.csv

Ablation: fixed portfolio order, custom portfolio file:
    python -m scripts.bench run --functions branin-2d --seeds 0..4 --no-shuffle --portfolio gp_only.json

Ask/tell over stdin/stdout (one JSON request per line):
    python -m scripts.bench serve --space space.json --seed 3 --registry registry.json
    python -m scripts.bench serve --space space.json --seed 3 --resume history.csv --dump history.csv

Summaries from stored CSVs:
    python -m scripts.bench report --in results/squirrel.csv results/random.csv

Build a warmstart registry from offline runs:
    python -m scripts.bench build-registry --functions branin-2d --seeds 0..9 --out registry.json

Exit codes: 0 success, 2 configuration error, 3 protocol error.
"""

import argparse
import logging
import os
import sys

# Ensure repo root is on the path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from squirrel import config                                          # noqa: E402
from squirrel.bench.functions import get_functions                   # noqa: E402
from squirrel.bench.report import read_results, report, summarize    # noqa: E402
from squirrel.bench.runner import build_registry, run_experiment     # noqa: E402
from squirrel.errors import ConfigError, ProtocolError               # noqa: E402
from squirrel.history import History                                 # noqa: E402
from squirrel.scheduler import SquirrelOptimizer                     # noqa: E402
from squirrel.space import load_space                                # noqa: E402
from squirrel.utils import ConfigLoader, parse_seeds                 # noqa: E402
from squirrel.warmstart.registry import load_registry, save_registry  # noqa: E402
from squirrel.wire import EXIT_CONFIG, EXIT_OK, EXIT_PROTOCOL, WireSession, serve  # noqa: E402

logging.basicConfig(
    level=getattr(logging, config.LOG_LEVEL.upper(), logging.INFO),
    format="%(asctime)s │ %(levelname)-7s │ %(name)s │ %(message)s",
    datefmt="%H:%M:%S",
    stream=sys.stderr,
)
logger = logging.getLogger("bench")


def _settings(args: argparse.Namespace):
    """Defaults, then the settings file, then CLI ablation flags."""
    loader = ConfigLoader()
    settings = loader.load(args.settings or config.SETTINGS_PATH or None)
    overrides = {}
    if getattr(args, "no_shuffle", False):
        overrides["shuffle_portfolio"] = False
    if getattr(args, "portfolio", None):
        overrides["portfolio_path"] = args.portfolio
    if overrides:
        settings = loader.load({**settings.model_dump(), **overrides})
    return settings


def _registry_path(args: argparse.Namespace) -> str | None:
    return args.registry or config.REGISTRY_PATH or None


def cmd_run(args: argparse.Namespace) -> int:
    settings = _settings(args)
    functions = get_functions(args.functions)
    seeds = parse_seeds(args.seeds)
    results = run_experiment(
        args.optimizer, functions, seeds,
        registry_path=_registry_path(args),
        settings=settings,
        workers=args.workers,
    )
    print(report(results, args.out))
    logger.info("━" * 60)
    logger.info("Done: %d runs written to %s", len(results), args.out)
    return EXIT_OK


def cmd_serve(args: argparse.Namespace) -> int:
    settings = _settings(args)
    session = WireSession(settings=settings)

    if args.space:
        space = load_space(args.space)
        path = _registry_path(args)
        registry = load_registry(path) if path else None
        session.optimizer = SquirrelOptimizer(space, seed=args.seed, registry=registry, settings=settings)
        if args.resume:
            history = History.from_csv(args.resume, space)
            session.optimizer.resume(history.trials)
    elif args.resume:
        raise ConfigError("--resume needs --space")

    def dump(s: WireSession) -> None:
        if args.dump:
            s.optimizer.history.to_csv(args.dump)

    return serve(sys.stdin, sys.stdout, session, on_exit=dump)


def cmd_report(args: argparse.Namespace) -> int:
    results = []
    for path in args.inputs:
        results.extend(read_results(path))
    print(summarize(results))
    return EXIT_OK


def cmd_build_registry(args: argparse.Namespace) -> int:
    settings = _settings(args)
    registry = build_registry(get_functions(args.functions), parse_seeds(args.seeds), settings, n=args.n)
    save_registry(registry, args.out)
    return EXIT_OK


def _add_settings_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--settings", type=str, help="YAML file overriding squirrel/config.yaml")
    p.add_argument("--no-shuffle", action="store_true", help="Keep the portfolio order fixed")
    p.add_argument("--portfolio", type=str, help="JSON file with a custom triplet portfolio")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Benchmark and serve the squirrel switching optimizer.",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run an optimizer on built-in functions")
    run.add_argument("--functions", default="all", help="'all' or comma-separated names")
    run.add_argument("--optimizer", choices=["squirrel", "random"], default="squirrel")
    run.add_argument("--seeds", default="0..19", help="'0..19' or '1,4,7'")
    run.add_argument("--registry", type=str, help="Warmstart registry JSON")
    run.add_argument("--out", default=config.BENCH_RESULTS_PATH, help="Results CSV")
    run.add_argument("--workers", type=int, default=config.BENCH_WORKERS, help="Worker processes")
    _add_settings_flags(run)
    run.set_defaults(handler=cmd_run)

    srv = sub.add_parser("serve", help="Ask/tell wire mode on stdin/stdout")
    srv.add_argument("--space", type=str, help="Space spec JSON (otherwise send an 'init' request)")
    srv.add_argument("--seed", type=int, default=0)
    srv.add_argument("--registry", type=str, help="Warmstart registry JSON")
    srv.add_argument("--resume", type=str, help="History CSV to replay before serving")
    srv.add_argument("--dump", type=str, help="Write the history CSV here on exit")
    _add_settings_flags(srv)
    srv.set_defaults(handler=cmd_serve)

    rep = sub.add_parser("report", help="Summarize result CSVs")
    rep.add_argument("--in", dest="inputs", nargs="+", required=True, help="Result CSV file(s)")
    rep.set_defaults(handler=cmd_report)

    reg = sub.add_parser("build-registry", help="Build a warmstart registry from offline runs")
    reg.add_argument("--functions", default="all")
    reg.add_argument("--seeds", default="0..9")
    reg.add_argument("--n", type=int, default=None, help="Configs per entry (default: n_warmstart_stored)")
    reg.add_argument("--out", required=True)
    reg.add_argument("--settings", type=str, help="YAML file overriding squirrel/config.yaml")
    reg.set_defaults(handler=cmd_build_registry)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as e:
        logger.error("✗ %s", e)
        return EXIT_CONFIG
    except ProtocolError as e:
        logger.error("✗ %s", e)
        return EXIT_PROTOCOL


if __name__ == "__main__":
    sys.exit(main())
