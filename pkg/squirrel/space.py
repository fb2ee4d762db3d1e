"""
Mixed-type configuration spaces and their unit-cube encoding.

Every surrogate and the DE engine work on vectors in [0, 1]^d:

    continuous   u = (v - lo) / (hi - lo)                (log: in ln-space)
    integer      same, on the widened range [lo - 0.5, hi + 0.5]
    categorical  u = (index + 0.5) / k

``decode`` is total on the unit cube, so any vector an optimizer produces maps
to a valid configuration.
"""

import json
import math
from typing import Any, Literal, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationError, model_validator

from squirrel.errors import ConfigError

Configuration = dict[str, Any]


class ParamSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    name: str
    kind: Literal["continuous", "integer", "categorical"]
    lower: Optional[float] = None
    upper: Optional[float] = None
    log_scale: bool = False
    choices: Optional[tuple[str, ...]] = None

    @model_validator(mode="after")
    def _check_kind(self):
        if not self.name:
            raise ValueError("name must be non-empty")
        if self.kind == "categorical":
            if self.lower is not None or self.upper is not None or self.log_scale:
                raise ValueError("categorical parameters take only 'choices'")
            if not self.choices:
                raise ValueError("categorical choices must be non-empty")
            if len(set(self.choices)) != len(self.choices):
                raise ValueError("categorical choices must be distinct")
            return self

        if self.choices is not None:
            raise ValueError(f"{self.kind} parameters do not take 'choices'")
        if self.lower is None or self.upper is None:
            raise ValueError("lower and upper bounds are required")
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)):
            raise ValueError("bounds must be finite")
        if self.kind == "continuous" and not self.lower < self.upper:
            raise ValueError(f"degenerate bounds [{self.lower}, {self.upper}]")
        if self.kind == "integer":
            if self.lower != int(self.lower) or self.upper != int(self.upper):
                raise ValueError("integer bounds must be integral")
            if not self.lower <= self.upper:
                raise ValueError(f"invalid bounds [{self.lower}, {self.upper}]")
        if self.log_scale and self.lower <= 0:
            raise ValueError("log_scale requires lower > 0")
        return self

    # ── per-parameter codec ──────────────────────────────────────────────────

    def _span(self) -> tuple[float, float]:
        """Encoding interval in the parameter's own scale (widened for integers)."""
        lo, hi = self.lower, self.upper
        if self.kind == "integer":
            lo, hi = lo - 0.5, hi + 0.5
        if self.log_scale:
            return math.log(lo), math.log(hi)
        return lo, hi

    def encode_value(self, value: Any) -> float:
        if self.kind == "categorical":
            if value not in self.choices:
                raise ConfigError(f"{self.name}: {value!r} is not one of {list(self.choices)}")
            return (self.choices.index(value) + 0.5) / len(self.choices)

        if isinstance(value, bool) or not isinstance(value, (int, float, np.integer, np.floating)):
            raise ConfigError(f"{self.name}: expected a number, got {value!r}")
        v = float(value)
        if not (self.lower <= v <= self.upper):
            raise ConfigError(f"{self.name}: {v} outside [{self.lower}, {self.upper}]")
        if self.kind == "integer" and v != round(v):
            raise ConfigError(f"{self.name}: {v} is not an integer")
        lo, hi = self._span()
        x = math.log(v) if self.log_scale else v
        return min(max((x - lo) / (hi - lo), 0.0), 1.0)

    def decode_value(self, u: float) -> Any:
        u = min(max(float(u), 0.0), 1.0)
        if self.kind == "categorical":
            k = len(self.choices)
            return self.choices[min(int(math.floor(u * k)), k - 1)]

        lo, hi = self._span()
        x = lo + u * (hi - lo)
        v = math.exp(x) if self.log_scale else x
        if self.kind == "integer":
            return int(min(max(math.floor(v + 0.5), self.lower), self.upper))
        return min(max(v, self.lower), self.upper)

    def canonical(self) -> list:
        if self.kind == "categorical":
            return [self.name, self.kind, None, None, False, list(self.choices)]
        return [self.name, self.kind, float(self.lower), float(self.upper), self.log_scale, None]


class ConfigSpace(BaseModel):
    """Ordered parameters; the order defines the unit-vector coordinate order."""

    model_config = ConfigDict(frozen=True)

    params: tuple[ParamSpec, ...]

    @model_validator(mode="after")
    def _check_names(self):
        seen: set[str] = set()
        for p in self.params:
            if p.name in seen:
                raise ValueError(f"duplicate parameter name {p.name!r}")
            seen.add(p.name)
        return self

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def names(self) -> list[str]:
        return [p.name for p in self.params]

    def __getitem__(self, name: str) -> ParamSpec:
        for p in self.params:
            if p.name == name:
                return p
        raise KeyError(name)


# ── construction ──────────────────────────────────────────────────────────────

def build_space(items: Sequence[dict]) -> ConfigSpace:
    """Build a space from already-decoded JSON parameter objects."""
    if not isinstance(items, (list, tuple)):
        raise ConfigError("space spec must be a JSON array of parameter objects")

    params: list[ParamSpec] = []
    seen: set[str] = set()
    for i, item in enumerate(items):
        label = item.get("name", f"#{i}") if isinstance(item, dict) else f"#{i}"
        if not isinstance(item, dict):
            raise ConfigError(f"parameter {label}: expected an object")
        try:
            spec = ParamSpec(**item)
        except ValidationError as e:
            reasons = "; ".join(err["msg"] for err in e.errors())
            raise ConfigError(f"parameter {label!r}: {reasons}") from e
        if spec.name in seen:
            raise ConfigError(f"parameter {spec.name!r}: duplicate name")
        seen.add(spec.name)
        params.append(spec)

    if not params:
        raise ConfigError("space spec declares no parameters")
    return ConfigSpace(params=tuple(params))


def parse_space(spec_document: str) -> ConfigSpace:
    """Parse a JSON space-spec document (top-level array of parameter objects)."""
    try:
        items = json.loads(spec_document)
    except json.JSONDecodeError as e:
        raise ConfigError(f"space spec is not valid JSON: {e}") from e
    return build_space(items)


def load_space(path: str) -> ConfigSpace:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return parse_space(f.read())
    except OSError as e:
        raise ConfigError(f"Cannot read space spec {path}: {e}") from e


def space_to_spec(space: ConfigSpace) -> list[dict]:
    """Inverse of ``build_space``: the JSON-ready parameter list."""
    specs = []
    for p in space.params:
        item = p.model_dump(exclude_none=True)
        if p.choices:
            item["choices"] = list(p.choices)
        specs.append(item)
    return specs


# ── codec ─────────────────────────────────────────────────────────────────────

def encode(space: ConfigSpace, config: Configuration) -> np.ndarray:
    missing = [n for n in space.names if n not in config]
    extra = [n for n in config if n not in set(space.names)]
    if missing or extra:
        raise ConfigError(f"configuration does not match space (missing={missing}, extra={extra})")
    return np.array([p.encode_value(config[p.name]) for p in space.params], dtype=float)


def decode(space: ConfigSpace, u: Sequence[float]) -> Configuration:
    u = np.asarray(u, dtype=float)
    if u.shape != (space.dim,):
        raise ValueError(f"expected a vector of length {space.dim}, got shape {u.shape}")
    return {p.name: p.decode_value(ui) for p, ui in zip(space.params, u)}


def project(space: ConfigSpace, u: Sequence[float]) -> np.ndarray:
    """Snap a unit vector onto the encoding of the configuration it decodes to."""
    return encode(space, decode(space, u))


def sample_random(space: ConfigSpace, rng: np.random.Generator) -> Configuration:
    return decode(space, rng.random(space.dim))


def fingerprint(space: ConfigSpace) -> str:
    """
    Canonical serialization used for registry matching.

    Parameter order does not participate; names, kinds, ranges, log flags and
    choice lists do.
    """
    params = sorted((p.canonical() for p in space.params), key=lambda c: c[0])
    return json.dumps({"d": space.dim, "params": params}, sort_keys=True, separators=(",", ":"))
