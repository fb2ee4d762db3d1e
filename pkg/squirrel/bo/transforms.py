"""
Output-space transforms applied to objective values before surrogate fitting.

    identity  z = y
    log       z = ln(y - min(y) + delta)
    copula    z = Phi^-1((rank - 0.5) / n), ties get their average rank

Each ``apply`` returns the state needed by ``invert``, which turns a predicted
transformed value back into a raw objective value (Kriging Believer fantasies).
"""

from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy.special import ndtri
from scipy.stats import rankdata


class TransformKind(str, Enum):
    IDENTITY = "identity"
    LOG = "log"
    COPULA = "copula"


@dataclass(frozen=True)
class TransformState:
    kind: TransformKind
    shift: float = 0.0
    delta: float = 0.0
    # copula only: distinct raw values and their transformed images, increasing
    raw_sorted: np.ndarray = field(default_factory=lambda: np.empty(0))
    z_sorted: np.ndarray = field(default_factory=lambda: np.empty(0))

    def shifted(self, y) -> np.ndarray:
        """Raw values moved into the positive domain the log transform works on."""
        return np.asarray(y, dtype=float) - self.shift + self.delta


def log_delta(y: np.ndarray) -> float:
    return max(1e-6, 1e-4 * float(y.max() - y.min()))


def apply(kind: TransformKind | str, y) -> tuple[np.ndarray, TransformState]:
    kind = TransformKind(kind)
    y = np.asarray(y, dtype=float)
    if y.size == 0:
        raise ValueError("cannot transform an empty target vector")
    if not np.all(np.isfinite(y)):
        raise ValueError("transform targets must be finite")

    if kind is TransformKind.IDENTITY:
        return y.copy(), TransformState(kind)

    if kind is TransformKind.LOG:
        shift = float(y.min())
        delta = log_delta(y)
        state = TransformState(kind, shift=shift, delta=delta)
        return np.log(state.shifted(y)), state

    ranks = rankdata(y, method="average")
    z = ndtri((ranks - 0.5) / y.size)
    raw_sorted, first = np.unique(y, return_index=True)
    return z, TransformState(kind, raw_sorted=raw_sorted, z_sorted=z[first])


def invert(state: TransformState, z) -> np.ndarray | float:
    z_arr = np.asarray(z, dtype=float)
    if state.kind is TransformKind.IDENTITY:
        out = z_arr.copy()
    elif state.kind is TransformKind.LOG:
        out = np.exp(z_arr) + state.shift - state.delta
    else:
        # np.interp clamps to the end values outside the observed range
        out = np.interp(z_arr, state.z_sorted, state.raw_sorted)
    return float(out) if out.ndim == 0 else out
