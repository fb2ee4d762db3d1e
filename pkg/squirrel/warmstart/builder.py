"""
Offline extraction of initial designs from completed runs.

Pools every finite trial of several runs on the same space and keeps the best
distinct configurations in order; the result is one registry entry.
"""

import math
from typing import Iterable

import numpy as np

from squirrel.history import History
from squirrel.space import ConfigSpace, Configuration


def extract_design(
    histories: Iterable[History],
    space: ConfigSpace,
    n: int = 22,
    tol: float = 1e-9,
) -> list[Configuration]:
    pooled = [t for h in histories for t in h if math.isfinite(t.y)]
    pooled.sort(key=lambda t: t.y)

    design: list[Configuration] = []
    kept: list[np.ndarray] = []
    for t in pooled:
        u = np.asarray(t.u)
        if kept and np.min(np.max(np.abs(np.asarray(kept) - u), axis=1)) <= tol:
            continue
        design.append(dict(t.config))
        kept.append(u)
        if len(design) == n:
            break
    return design
