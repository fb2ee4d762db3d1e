"""
Small shared helpers: settings loader, named random streams, seed parsing.
"""

import zlib
from pathlib import Path

import numpy as np
import yaml
from pydantic import ValidationError

from squirrel.errors import ConfigError
from squirrel.models import OptimizerSettings


class ConfigLoader:
    def __init__(self, default_path: str | None = None):
        if default_path is None:
            default_path = Path(__file__).parent / "config.yaml"
        self._default_dict = self._load_yaml(default_path)

    @staticmethod
    def _load_yaml(path):
        with open(path, "r", encoding="utf-8") as f:
            return yaml.safe_load(f) or {}

    def _validate_keys(self, user_dict):
        unknown_keys = set(user_dict) - set(self._default_dict)
        if unknown_keys:
            raise ConfigError(f"Unknown config keys: {sorted(unknown_keys)}")

    def load(self, user_opt=None) -> OptimizerSettings:
        """
        Load the settings, merging user options (dict, YAML path or settings) with defaults.
        """
        if user_opt is None:
            user_dict = {}
        elif isinstance(user_opt, OptimizerSettings):
            user_dict = user_opt.model_dump()
        elif isinstance(user_opt, dict):
            user_dict = user_opt
        elif isinstance(user_opt, (str, Path)):
            try:
                user_dict = self._load_yaml(user_opt)
            except (OSError, yaml.YAMLError) as e:
                raise ConfigError(f"Cannot read settings file {user_opt}: {e}") from e
        else:
            raise TypeError("user_opt must be dict, path, OptimizerSettings or None")

        self._validate_keys(user_dict)
        merged = {**self._default_dict, **user_dict}
        try:
            return OptimizerSettings(**merged)
        except ValidationError as e:
            raise ConfigError(f"Invalid optimizer settings: {e}") from e


def named_rng(seed: int, name: str) -> np.random.Generator:
    """
    Independent random stream derived from a root seed and a stream name.

    Streams with different names never share state, so changing how many draws
    one stage consumes leaves every other stage's randomness untouched.
    """
    key = zlib.crc32(name.encode("utf-8"))
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(key,)))


def parse_seeds(text: str) -> list[int]:
    """Parse ``"0..19"`` (inclusive range) or ``"1,4,7"`` into a list of seeds."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = text.split("..", 1)
            seeds = list(range(int(lo), int(hi) + 1))
        else:
            seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError as e:
        raise ConfigError(f"Cannot parse seeds {text!r}") from e
    if not seeds:
        raise ConfigError(f"No seeds in {text!r}")
    return seeds
