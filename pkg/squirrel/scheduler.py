"""
The switching controller.

Batches are assigned to stages by index (default 3 init / 8 BO / 5 DE); each
batch is produced by exactly one stage, warmstarted with every observation so
far. ``suggest`` and ``observe`` must strictly alternate.
"""

import logging
import math
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from squirrel.bo.portfolio import Portfolio, default_portfolio, load_portfolio
from squirrel.bo.proposer import propose_batch_bo
from squirrel.de.engine import (
    DEParams,
    DEState,
    de_init_from_history,
    de_init_random,
    de_propose_batch,
    de_select,
)
from squirrel.errors import ProtocolError
from squirrel.history import History
from squirrel.models import OptimizerSettings, StageTag, Trial
from squirrel.space import ConfigSpace, Configuration, encode
from squirrel.utils import named_rng
from squirrel.warmstart.registry import Registry, initial_design

logger = logging.getLogger(__name__)


class Stage(str, Enum):
    INIT_WARMSTART = "init_warmstart"
    INIT_DE = "init_de"
    BO = "bo"
    DE_FINAL = "de_final"


_STAGE_TAGS: dict[Stage, StageTag] = {
    Stage.INIT_WARMSTART: "warmstart",
    Stage.INIT_DE: "de_init",
    Stage.BO: "bo",
    Stage.DE_FINAL: "de_final",
}


def stage_for_batch(
    batch_index: int,
    warmstart_matched: bool,
    settings: OptimizerSettings | None = None,
) -> Stage:
    settings = settings or OptimizerSettings()
    if not 0 <= batch_index < settings.n_batches:
        raise ValueError(f"batch index {batch_index} outside 0..{settings.n_batches - 1}")
    if batch_index < settings.n_init_batches:
        return Stage.INIT_WARMSTART if warmstart_matched else Stage.INIT_DE
    if batch_index < settings.n_init_batches + settings.n_bo_batches:
        return Stage.BO
    return Stage.DE_FINAL


class SquirrelOptimizer:
    """
    Ask/tell optimizer over a ``ConfigSpace`` (minimization).

    Every stage draws from its own named random stream derived from ``seed``,
    so identical (space, registry, seed, observed values) reproduce the same
    suggestion stream exactly.
    """

    def __init__(
        self,
        space: ConfigSpace,
        seed: int = 0,
        registry: Optional[Registry] = None,
        settings: OptimizerSettings | None = None,
        portfolio: Optional[Portfolio] = None,
    ):
        self.space = space
        self.seed = seed
        self.settings = settings or OptimizerSettings()
        self.history = History(space)
        self.batch_index = 0
        self.stages: list[Stage] = []

        if portfolio is None:
            if self.settings.portfolio_path:
                portfolio = load_portfolio(self.settings.portfolio_path)
            else:
                portfolio = default_portfolio(self.settings.lcb_kappa)
        self.portfolio = portfolio

        self._rng_init = named_rng(seed, "init")
        self._rng_bo = named_rng(seed, "bo")
        self._rng_de_final = named_rng(seed, "de_final")

        self._design: Optional[list[Configuration]] = None
        if registry is not None:
            self._design = initial_design(
                registry, space, self._rng_init,
                n_stored=self.settings.n_warmstart_stored,
                n_random=self.settings.n_warmstart_random,
            )
        self.warmstart_matched = self._design is not None
        logger.info(
            "Optimizer ready: d=%d seed=%d warmstart=%s",
            space.dim, seed, "matched" if self.warmstart_matched else "none",
        )

        self._de_init: Optional[DEState] = None
        self._de_final: Optional[DEState] = None
        self._outstanding: Optional[list[Configuration]] = None
        self._outstanding_u: Optional[np.ndarray] = None
        self._outstanding_stage: Optional[Stage] = None

    # ── helpers ──────────────────────────────────────────────────────────────

    @property
    def finished(self) -> bool:
        return self.batch_index >= self.settings.n_batches

    @property
    def current_stage(self) -> Stage:
        return stage_for_batch(self.batch_index, self.warmstart_matched, self.settings)

    def _de_params(self, g_max: int) -> DEParams:
        s = self.settings
        return DEParams(
            g_max=g_max,
            population_size=s.batch_size,
            freq=s.de_freq,
            cr_mean=s.de_cr_mean,
            cr_var=s.de_cr_var,
        )

    def _propose(self, stage: Stage) -> list[Configuration]:
        s = self.settings
        b = self.batch_index

        if stage is Stage.INIT_WARMSTART:
            return [dict(c) for c in self._design[b * s.batch_size:(b + 1) * s.batch_size]]

        if stage is Stage.INIT_DE:
            if self._de_init is None:
                self._de_init, batch = de_init_random(self.space, self._rng_init, s.batch_size)
                return batch
            # the random batch seeds the population, so the remaining init
            # batches are the DE generations of this phase
            return de_propose_batch(
                self._de_init, self._de_params(max(s.n_init_batches - 1, 1)),
                self._rng_init, self.space,
            )

        if stage is Stage.BO:
            return propose_batch_bo(self.history, self.space, self.portfolio, self._rng_bo, s)

        if self._de_final is None:
            best = self.history.incumbent()
            if best is None:
                logger.warning("No finite trial before the final DE stage; starting from a random population")
                self._de_final, batch = de_init_random(self.space, self._rng_de_final, s.batch_size)
                return batch
            logger.info("Switching to final DE stage (incumbent %.6g)", best[1])
            self._de_final = de_init_from_history(self.history, self._rng_de_final, s.batch_size)
        return de_propose_batch(
            self._de_final, self._de_params(max(s.n_de_batches, 1)),
            self._rng_de_final, self.space,
        )

    # ── ask / tell ───────────────────────────────────────────────────────────

    def suggest(self) -> list[Configuration]:
        if self._outstanding is not None:
            raise ProtocolError("suggest called twice without observe")
        if self.finished:
            raise ProtocolError(f"run exhausted after {self.settings.n_batches} batches")

        stage = self.current_stage
        if self.stages and stage is not self.stages[-1]:
            logger.info("Batch %d: switching stage %s -> %s", self.batch_index, self.stages[-1].value, stage.value)
        batch = self._propose(stage)
        if len(batch) != self.settings.batch_size:
            raise RuntimeError(f"stage {stage.value} produced {len(batch)} configurations")

        self._outstanding = [dict(c) for c in batch]
        self._outstanding_u = np.array([encode(self.space, c) for c in batch])
        self._outstanding_stage = stage
        logger.debug("Batch %d (%s) suggested", self.batch_index, stage.value)
        return [dict(c) for c in batch]

    def observe(
        self,
        configs: Optional[Sequence[Configuration]],
        values: Sequence[Optional[float]],
    ) -> None:
        """
        Record the outstanding batch. ``configs`` may be any permutation of the
        suggestion (values follow that order) or ``None`` for suggestion order.
        NaN and ``None`` values are recorded as +inf (failed evaluation).
        """
        if self._outstanding is None:
            raise ProtocolError("observe called without an outstanding suggestion")
        n = self.settings.batch_size
        if len(values) != n:
            raise ProtocolError(f"expected {n} values, got {len(values)}")

        ordered = self._align(configs, values)
        stage = self._outstanding_stage
        tag = _STAGE_TAGS[stage]
        for config, y in zip(self._outstanding, ordered):
            self.history.record(config, y, self.batch_index, tag)

        if stage is Stage.INIT_DE:
            de_select(self._de_init, ordered)
        elif stage is Stage.DE_FINAL:
            de_select(self._de_final, ordered)

        self.stages.append(stage)
        best = self.history.incumbent()
        logger.info(
            "Batch %d (%s) observed; best so far %s",
            self.batch_index, stage.value, "n/a" if best is None else f"{best[1]:.6g}",
        )
        self.batch_index += 1
        self._outstanding = None
        self._outstanding_u = None
        self._outstanding_stage = None

    def _align(self, configs, values) -> list[float]:
        cleaned = [_clean_value(v) for v in values]
        if configs is None:
            return cleaned
        if len(configs) != len(cleaned):
            raise ProtocolError(f"got {len(configs)} configs but {len(cleaned)} values")

        ordered: list[Optional[float]] = [None] * len(cleaned)
        free = list(range(len(self._outstanding)))
        for config, y in zip(configs, cleaned):
            try:
                u = encode(self.space, config)
            except ValueError as e:
                raise ProtocolError(f"observed config is not valid for the space: {e}") from e
            match = next(
                (i for i in free if np.max(np.abs(self._outstanding_u[i] - u)) <= 1e-9), None
            )
            if match is None:
                raise ProtocolError(f"observed config {config} was not part of the suggestion")
            free.remove(match)
            ordered[match] = y
        return ordered

    # ── resume ───────────────────────────────────────────────────────────────

    def resume(self, trials: Sequence[Trial]) -> None:
        """
        Replay recorded batches through suggest/observe. Each recorded batch
        must be exactly what this optimizer (same seed and settings) suggests.
        """
        n = self.settings.batch_size
        if len(trials) % n:
            raise ProtocolError(f"recorded history has {len(trials)} trials, not a multiple of {n}")
        for start in range(0, len(trials), n):
            batch = trials[start:start + n]
            self.suggest()
            try:
                self.observe([t.config for t in batch], [t.y for t in batch])
            except ProtocolError as e:
                raise ProtocolError(
                    f"recorded batch {batch[0].batch_index} diverges from the regenerated suggestion: {e}"
                ) from e
        logger.info("Resumed %d batches", self.batch_index)


def _clean_value(v) -> float:
    if v is None:
        return math.inf
    y = float(v)
    if math.isnan(y):
        logger.warning("NaN objective recorded as +inf")
        return math.inf
    return y
