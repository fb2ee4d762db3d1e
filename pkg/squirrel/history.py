"""
Append-only trial ledger shared by every stage of a run.
"""

import csv
import logging
import math
from typing import Optional

import numpy as np

from squirrel.errors import ConfigError
from squirrel.models import StageTag, Trial
from squirrel.space import ConfigSpace, Configuration, encode

logger = logging.getLogger(__name__)

_STAGE_TAGS = ("warmstart", "de_init", "bo", "de_final")


class History:
    """
    Trials in insertion order plus a running incumbent.

    Failed evaluations carry ``y = +inf``; they count toward the batch but are
    imputed (see ``design_matrix``) before any surrogate sees them.
    """

    def __init__(self, space: ConfigSpace):
        self.space = space
        self.trials: list[Trial] = []
        self._best: Optional[int] = None

    def __len__(self) -> int:
        return len(self.trials)

    def __iter__(self):
        return iter(self.trials)

    def record(
        self,
        config: Configuration,
        y: float,
        batch_index: int,
        stage_tag: StageTag,
    ) -> Trial:
        """Append one trial. The incumbent moves only on a strict improvement."""
        y = float(y)
        if math.isnan(y):
            raise ValueError("NaN objective values must be mapped to +inf before recording")
        if self.trials and batch_index < self.trials[-1].batch_index:
            raise ValueError(
                f"batch_index {batch_index} precedes last recorded batch {self.trials[-1].batch_index}"
            )
        u = encode(self.space, config)
        trial = Trial(
            config=dict(config),
            u=tuple(float(x) for x in u),
            y=y,
            batch_index=batch_index,
            stage_tag=stage_tag,
        )
        self.trials.append(trial)
        if math.isfinite(y) and (self._best is None or y < self.trials[self._best].y):
            self._best = len(self.trials) - 1
        return trial

    def incumbent(self) -> Optional[tuple[Configuration, float]]:
        """Best finite trial, earliest on ties; ``None`` if no finite value exists."""
        if self._best is None:
            return None
        best = self.trials[self._best]
        return dict(best.config), best.y

    @property
    def incumbent_index(self) -> Optional[int]:
        return self._best

    def design_matrix(self) -> tuple[np.ndarray, np.ndarray]:
        """
        Inputs and targets for surrogate fitting.

        Infinite targets are imputed to ``max + 3 * (max - min)`` of the finite
        values; with no finite value at all, both matrices are empty.
        """
        d = self.space.dim
        if not self.trials:
            return np.empty((0, d)), np.empty(0)
        y = np.array([t.y for t in self.trials], dtype=float)
        finite = np.isfinite(y)
        if not finite.any():
            return np.empty((0, d)), np.empty(0)
        hi, lo = y[finite].max(), y[finite].min()
        y = np.where(finite, y, hi + 3.0 * (hi - lo))
        X = np.array([t.u for t in self.trials], dtype=float)
        return X, y

    def unit_vectors(self) -> np.ndarray:
        if not self.trials:
            return np.empty((0, self.space.dim))
        return np.array([t.u for t in self.trials], dtype=float)

    def best_so_far(self) -> list[float]:
        """Running best value at the end of each batch, in batch order."""
        out: list[float] = []
        best = math.inf
        current = None
        for t in self.trials:
            if current is not None and t.batch_index != current:
                out.append(best)
            current = t.batch_index
            best = min(best, t.y)
        if current is not None:
            out.append(best)
        return out

    # ── CSV import / export ──────────────────────────────────────────────────

    def to_csv(self, path: str) -> None:
        header = ["batch_index", "stage_tag", *self.space.names, "y"]
        try:
            with open(path, "w", newline="", encoding="utf-8") as f:
                writer = csv.writer(f)
                writer.writerow(header)
                for t in self.trials:
                    writer.writerow(
                        [t.batch_index, t.stage_tag]
                        + [_format_value(t.config[n]) for n in self.space.names]
                        + [repr(t.y)]
                    )
        except OSError as e:
            raise ConfigError(f"Cannot write history to {path}: {e}") from e
        logger.info("Wrote %d trials to %s", len(self.trials), path)

    @classmethod
    def from_csv(cls, path: str, space: ConfigSpace) -> "History":
        history = cls(space)
        try:
            with open(path, "r", newline="", encoding="utf-8") as f:
                reader = csv.DictReader(f)
                expected = {"batch_index", "stage_tag", "y", *space.names}
                if reader.fieldnames is None or set(reader.fieldnames) != expected:
                    raise ConfigError(
                        f"{path}: columns {reader.fieldnames} do not match space {space.names}"
                    )
                for lineno, row in enumerate(reader, start=2):
                    if row["stage_tag"] not in _STAGE_TAGS:
                        raise ConfigError(f"{path}:{lineno}: unknown stage_tag {row['stage_tag']!r}")
                    config = {p.name: _parse_value(p, row[p.name]) for p in space.params}
                    history.record(
                        config,
                        float(row["y"]),
                        int(row["batch_index"]),
                        row["stage_tag"],
                    )
        except OSError as e:
            raise ConfigError(f"Cannot read history {path}: {e}") from e
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"{path}: malformed history row: {e}") from e
        return history


def _format_value(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _parse_value(param, text: str):
    if param.kind == "categorical":
        return text
    if param.kind == "integer":
        return int(float(text))
    return float(text)
