"""
Benchmark CSV output and summaries.

CSV layout: one row per (function, optimizer, seed, batch) with the best-so-far
value at the end of that batch; ``wall_time`` repeats the run's total time.
"""

import csv
import logging
import os
from collections import defaultdict
from itertools import combinations

import numpy as np

from squirrel.errors import ConfigError
from squirrel.models import RunResult

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["function", "optimizer", "seed", "batch", "best_so_far", "wall_time"]


def write_results(results: list[RunResult], path: str) -> None:
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(CSV_COLUMNS)
            for r in results:
                for batch, value in enumerate(r.best_so_far):
                    writer.writerow([r.function, r.optimizer, r.seed, batch, repr(value), f"{r.wall_time:.3f}"])
    except OSError as e:
        raise ConfigError(f"Cannot write results to {path}: {e}") from e
    logger.info("Wrote %d runs to %s", len(results), path)


def read_results(path: str) -> list[RunResult]:
    runs: dict[tuple[str, str, int], dict] = {}
    try:
        with open(path, "r", newline="", encoding="utf-8") as f:
            reader = csv.DictReader(f)
            if reader.fieldnames != CSV_COLUMNS:
                raise ConfigError(f"{path}: expected columns {CSV_COLUMNS}, got {reader.fieldnames}")
            for lineno, row in enumerate(reader, start=2):
                try:
                    key = (row["function"], row["optimizer"], int(row["seed"]))
                    run = runs.setdefault(key, {"values": {}, "wall_time": float(row["wall_time"])})
                    run["values"][int(row["batch"])] = float(row["best_so_far"])
                except ValueError as e:
                    raise ConfigError(f"{path}:{lineno}: {e}") from e
    except OSError as e:
        raise ConfigError(f"Cannot read results {path}: {e}") from e

    results = []
    for (function, optimizer, seed), run in runs.items():
        values = [run["values"][b] for b in sorted(run["values"])]
        results.append(RunResult(
            function=function,
            optimizer=optimizer,
            seed=seed,
            best_so_far=values,
            final_best=values[-1],
            wall_time=run["wall_time"],
        ))
    results.sort(key=lambda r: (r.function, r.optimizer, r.seed))
    return results


def summarize(results: list[RunResult]) -> str:
    """Per-function median final best for each optimizer, plus paired win rates."""
    by_function: dict[str, dict[str, dict[int, float]]] = defaultdict(lambda: defaultdict(dict))
    for r in results:
        by_function[r.function][r.optimizer][r.seed] = r.final_best

    lines = []
    for function in sorted(by_function):
        lines.append(function)
        per_opt = by_function[function]
        for optimizer in sorted(per_opt):
            finals = list(per_opt[optimizer].values())
            lines.append(f"  {optimizer:<10} median final best {np.median(finals):.6g} over {len(finals)} seeds")
        for a, b in combinations(sorted(per_opt), 2):
            shared = sorted(set(per_opt[a]) & set(per_opt[b]))
            if not shared:
                continue
            wins = sum(per_opt[a][s] < per_opt[b][s] for s in shared)
            ties = sum(per_opt[a][s] == per_opt[b][s] for s in shared)
            lines.append(
                f"  win rate {a} vs {b}: {wins / len(shared):.2f} "
                f"({wins} wins, {ties} ties, {len(shared)} paired seeds)"
            )
    return "\n".join(lines)


def report(results: list[RunResult], out_path: str) -> str:
    write_results(results, out_path)
    return summarize(results)
