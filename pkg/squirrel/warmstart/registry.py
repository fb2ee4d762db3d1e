"""
Registry of meta-learned initial designs, keyed by space fingerprint.

File format:

    {"entries": [{"space": [<parameter objects>], "configs": [{name: value, ...}, ...]}]}

A space matches an entry only if dimensions, names, kinds and ranges agree
exactly (parameter order is irrelevant).
"""

import json
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from pydantic import ValidationError

from squirrel.errors import ConfigError
from squirrel.models import RegistryFileModel
from squirrel.space import (
    ConfigSpace,
    Configuration,
    build_space,
    encode,
    fingerprint,
    sample_random,
    space_to_spec,
)

logger = logging.getLogger(__name__)


@dataclass
class Registry:
    entries: dict[str, list[Configuration]] = field(default_factory=dict)
    spaces: dict[str, ConfigSpace] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.entries)

    def add(self, space: ConfigSpace, configs: list[Configuration]) -> None:
        for config in configs:
            encode(space, config)  # raises ConfigError when invalid
        key = fingerprint(space)
        self.entries[key] = [dict(c) for c in configs]
        self.spaces[key] = space


def load_registry(path: str) -> Registry:
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot read registry {path}: {e}") from e

    try:
        doc = RegistryFileModel.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"{path}: malformed registry: {e}") from e

    registry = Registry()
    for i, entry in enumerate(doc.entries):
        try:
            space = build_space(entry.space)
            for j, config in enumerate(entry.configs):
                try:
                    encode(space, config)
                except ConfigError as e:
                    raise ConfigError(f"config #{j}: {e}") from e
        except ConfigError as e:
            raise ConfigError(f"{path}: registry entry #{i}: {e}") from e

        key = fingerprint(space)
        if key in registry.entries:
            logger.warning("%s: entry #%d repeats an earlier space; keeping the first", path, i)
            continue
        registry.entries[key] = [dict(c) for c in entry.configs]
        registry.spaces[key] = space

    logger.info("Loaded warmstart registry with %d entries from %s", len(registry), path)
    return registry


def save_registry(registry: Registry, path: str) -> None:
    doc = {
        "entries": [
            {"space": space_to_spec(registry.spaces[key]), "configs": configs}
            for key, configs in registry.entries.items()
        ]
    }
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2)
    except OSError as e:
        raise ConfigError(f"Cannot write registry {path}: {e}") from e
    logger.info("Wrote registry with %d entries to %s", len(registry), path)


def match_space(registry: Registry, space: ConfigSpace) -> Optional[list[Configuration]]:
    configs = registry.entries.get(fingerprint(space))
    return [dict(c) for c in configs] if configs is not None else None


def initial_design(
    registry: Registry,
    space: ConfigSpace,
    rng: np.random.Generator,
    n_stored: int = 22,
    n_random: int = 2,
) -> Optional[list[Configuration]]:
    """
    Stored configurations (truncated or padded with random ones to ``n_stored``),
    followed by ``n_random`` fresh random samples. ``None`` when the space is unknown.
    """
    stored = match_space(registry, space)
    if stored is None:
        return None
    if len(stored) != n_stored:
        logger.info("Registry entry has %d configs; adjusting to %d", len(stored), n_stored)
    design = stored[:n_stored]
    while len(design) < n_stored:
        design.append(sample_random(space, rng))
    design.extend(sample_random(space, rng) for _ in range(n_random))
    return design
