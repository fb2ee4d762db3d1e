"""
Experiment runner: drives an optimizer through the full batch schedule on each
(function, seed) pair and records the per-batch best-so-far.
"""

import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from typing import Literal, Optional, Sequence

from squirrel import config
from squirrel.bench.functions import FuncSpec, get_functions
from squirrel.errors import ConfigError, ProtocolError
from squirrel.history import History
from squirrel.models import OptimizerSettings, RunResult
from squirrel.scheduler import SquirrelOptimizer
from squirrel.space import ConfigSpace, Configuration, sample_random
from squirrel.utils import named_rng
from squirrel.warmstart.builder import extract_design
from squirrel.warmstart.registry import Registry, load_registry, save_registry

logger = logging.getLogger(__name__)

OptimizerKind = Literal["squirrel", "random"]


class RandomSearch:
    """Uniform sampling on the unit cube, with the same ask/tell surface as ``SquirrelOptimizer``."""

    def __init__(self, space: ConfigSpace, seed: int = 0, settings: OptimizerSettings | None = None):
        self.space = space
        self.settings = settings or OptimizerSettings()
        self.history = History(space)
        self.batch_index = 0
        self._rng = named_rng(seed, "random")
        self._outstanding: Optional[list[Configuration]] = None

    def suggest(self) -> list[Configuration]:
        if self._outstanding is not None:
            raise ProtocolError("suggest called twice without observe")
        if self.batch_index >= self.settings.n_batches:
            raise ProtocolError(f"run exhausted after {self.settings.n_batches} batches")
        self._outstanding = [sample_random(self.space, self._rng) for _ in range(self.settings.batch_size)]
        return [dict(c) for c in self._outstanding]

    def observe(self, configs, values: Sequence[Optional[float]]) -> None:
        if self._outstanding is None:
            raise ProtocolError("observe called without an outstanding suggestion")
        if len(values) != self.settings.batch_size:
            raise ProtocolError(f"expected {self.settings.batch_size} values, got {len(values)}")
        for config, y in zip(self._outstanding, values):
            y = math.inf if y is None or math.isnan(y) else float(y)
            self.history.record(config, y, self.batch_index, "bo")
        self.batch_index += 1
        self._outstanding = None


def evaluate_safely(func: FuncSpec, config: Configuration) -> float:
    try:
        y = float(func.evaluate(config))
    except Exception as e:
        logger.warning("%s raised on %s (%s); recording +inf", func.name, config, e)
        return math.inf
    return math.inf if math.isnan(y) else y


def drive(optimizer, func: FuncSpec, n_batches: int) -> float:
    """Run ``n_batches`` suggest/observe rounds; returns the wall time in seconds."""
    t0 = time.perf_counter()
    for _ in range(n_batches):
        batch = optimizer.suggest()
        optimizer.observe(None, [evaluate_safely(func, c) for c in batch])
    return time.perf_counter() - t0


def run_once(
    kind: OptimizerKind,
    func: FuncSpec,
    seed: int,
    registry: Optional[Registry] = None,
    settings: OptimizerSettings | None = None,
) -> RunResult:
    settings = settings or OptimizerSettings()
    if kind == "squirrel":
        optimizer = SquirrelOptimizer(func.space, seed=seed, registry=registry, settings=settings)
    elif kind == "random":
        optimizer = RandomSearch(func.space, seed=seed, settings=settings)
    else:
        raise ConfigError(f"Unknown optimizer {kind!r}; expected 'squirrel' or 'random'")

    elapsed = drive(optimizer, func, settings.n_batches)
    best = optimizer.history.best_so_far()
    logger.info("%s / %s / seed %d: best %.6g [%.1fs]", func.name, kind, seed, best[-1], elapsed)
    return RunResult(
        function=func.name,
        optimizer=kind,
        seed=seed,
        best_so_far=best,
        final_best=best[-1],
        wall_time=elapsed,
    )


def _run_by_name(kind, name, seed, registry_path, settings) -> RunResult:
    func = get_functions(name)[0]
    registry = load_registry(registry_path) if registry_path else None
    return run_once(kind, func, seed, registry, settings)


def run_experiment(
    kind: OptimizerKind,
    functions: Sequence[FuncSpec],
    seeds: Sequence[int],
    registry_path: Optional[str] = None,
    settings: OptimizerSettings | None = None,
    workers: int = 1,
) -> list[RunResult]:
    """
    One run per (function, seed). With ``workers > 1`` runs go to a process pool;
    only built-in functions can be shipped to workers (they are looked up by name).
    Results are sorted by (function, optimizer, seed) either way.
    """
    if not seeds:
        raise ConfigError("run_experiment needs at least one seed")
    settings = settings or OptimizerSettings()
    logger.info("Running %s on %d functions x %d seeds", kind, len(functions), len(seeds))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                pool.submit(_run_by_name, kind, f.name, seed, registry_path, settings)
                for f in functions
                for seed in seeds
            ]
            results = [fut.result() for fut in futures]
    else:
        registry = load_registry(registry_path) if registry_path else None
        results = [run_once(kind, f, seed, registry, settings) for f in functions for seed in seeds]

    results.sort(key=lambda r: (r.function, r.optimizer, r.seed))
    return results


def build_registry(
    functions: Sequence[FuncSpec],
    seeds: Sequence[int],
    settings: OptimizerSettings | None = None,
    n: int | None = None,
) -> Registry:
    """Run squirrel offline (no warmstart) and keep the best distinct configs per space."""
    if not seeds:
        raise ConfigError("build_registry needs at least one seed")
    settings = settings or OptimizerSettings()
    n = settings.n_warmstart_stored if n is None else n
    registry = Registry()
    for func in functions:
        histories = []
        for seed in seeds:
            optimizer = SquirrelOptimizer(func.space, seed=seed, settings=settings)
            drive(optimizer, func, settings.n_batches)
            histories.append(optimizer.history)
        design = extract_design(histories, func.space, n=n, tol=settings.duplicate_tol)
        registry.add(func.space, design)
        logger.info("%s: stored %d configurations from %d runs", func.name, len(design), len(seeds))
    return registry


DEMO_FUNCTIONS = "branin-2d"
DEMO_SEEDS = tuple(range(10))


def ensure_demo_registry(
    path: str = config.DEMO_REGISTRY_PATH,
    settings: OptimizerSettings | None = None,
) -> Registry:
    """
    Load the demonstration registry, building it first if the file is missing.

    Same result as
    ``python -m scripts.bench build-registry --functions branin-2d --seeds 0..9 --out <path>``.
    """
    if not os.path.exists(path):
        logger.info("No demo registry at %s; building it from %d offline runs", path, len(DEMO_SEEDS))
        registry = build_registry(get_functions(DEMO_FUNCTIONS), DEMO_SEEDS, settings)
        save_registry(registry, path)
    return load_registry(path)
