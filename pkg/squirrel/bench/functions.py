"""
Deterministic synthetic objectives for the benchmark harness.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from squirrel.errors import ConfigError
from squirrel.space import ConfigSpace, Configuration, build_space


@dataclass(frozen=True)
class FuncSpec:
    name: str
    space: ConfigSpace
    evaluate: Callable[[Configuration], float]
    known_optimum: Optional[float] = None


def _box(prefix: str, d: int, lower: float, upper: float) -> ConfigSpace:
    return build_space(
        [{"name": f"{prefix}{i}", "kind": "continuous", "lower": lower, "upper": upper} for i in range(d)]
    )


def _vector(config: Configuration, space: ConfigSpace) -> np.ndarray:
    return np.array([config[n] for n in space.names], dtype=float)


def sphere(x: np.ndarray) -> float:
    return float(np.sum(x**2))


def branin(x1: float, x2: float) -> float:
    b = 5.1 / (4.0 * math.pi**2)
    c = 5.0 / math.pi
    t = 1.0 / (8.0 * math.pi)
    return (x2 - b * x1**2 + c * x1 - 6.0) ** 2 + 10.0 * (1.0 - t) * math.cos(x1) + 10.0


def rosenbrock(x: np.ndarray) -> float:
    return float(np.sum(100.0 * (x[1:] - x[:-1] ** 2) ** 2 + (1.0 - x[:-1]) ** 2))


def ackley(x: np.ndarray) -> float:
    d = len(x)
    a = -20.0 * math.exp(-0.2 * math.sqrt(float(np.sum(x**2)) / d))
    b = -math.exp(float(np.sum(np.cos(2.0 * math.pi * x))) / d)
    return a + b + 20.0 + math.e


_BOWL_CENTERS = {"a": (0.0, 0.0), "b": (2.0, -1.0), "c": (-3.0, 3.0)}
_BOWL_OFFSETS = {"a": 1.0, "b": 0.0, "c": 0.5}


def mixed(config: Configuration) -> float:
    """Three quadratic bowls picked by ``bowl``; optimum 0 at bowl b, x=(2,-1), lr=1e-2, depth=4."""
    cx, cy = _BOWL_CENTERS[config["bowl"]]
    lr_term = (math.log10(config["lr"]) + 2.0) ** 2
    depth_term = 0.1 * (config["depth"] - 4) ** 2
    return (
        (config["x0"] - cx) ** 2
        + (config["x1"] - cy) ** 2
        + lr_term
        + depth_term
        + _BOWL_OFFSETS[config["bowl"]]
    )


def builtin_functions() -> list[FuncSpec]:
    sphere_space = _box("x", 10, -5.12, 5.12)
    branin_space = build_space([
        {"name": "x1", "kind": "continuous", "lower": -5.0, "upper": 10.0},
        {"name": "x2", "kind": "continuous", "lower": 0.0, "upper": 15.0},
    ])
    rosen_space = _box("x", 5, -2.048, 2.048)
    ackley_space = _box("x", 5, -32.768, 32.768)
    mixed_space = build_space([
        {"name": "x0", "kind": "continuous", "lower": -5.0, "upper": 5.0},
        {"name": "x1", "kind": "continuous", "lower": -5.0, "upper": 5.0},
        {"name": "lr", "kind": "continuous", "lower": 1e-5, "upper": 1.0, "log_scale": True},
        {"name": "depth", "kind": "integer", "lower": 1, "upper": 10},
        {"name": "bowl", "kind": "categorical", "choices": ["a", "b", "c"]},
    ])

    return [
        FuncSpec("sphere-10d", sphere_space, lambda c: sphere(_vector(c, sphere_space)), 0.0),
        FuncSpec("branin-2d", branin_space, lambda c: branin(c["x1"], c["x2"]), 0.397887),
        FuncSpec("rosenbrock-5d", rosen_space, lambda c: rosenbrock(_vector(c, rosen_space)), 0.0),
        FuncSpec("ackley-5d", ackley_space, lambda c: ackley(_vector(c, ackley_space)), 0.0),
        FuncSpec("mixed-5d", mixed_space, mixed, 0.0),
    ]


def get_functions(selection: str = "all") -> list[FuncSpec]:
    """``"all"`` or a comma-separated list of names, in the order given."""
    available = {f.name: f for f in builtin_functions()}
    if selection.strip() == "all":
        return list(available.values())
    names = [s.strip() for s in selection.split(",") if s.strip()]
    unknown = [n for n in names if n not in available]
    if unknown or not names:
        raise ConfigError(f"Unknown functions {unknown}; available: {sorted(available)}")
    return [available[n] for n in names]
