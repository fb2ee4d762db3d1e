"""
Acquisition scores. Every kind returns a value to be maximized.
"""

from enum import Enum

import numpy as np
from scipy.special import ndtr

from squirrel.bo.transforms import TransformKind, TransformState

_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class AcqKind(str, Enum):
    EI = "ei"
    LOG_EI = "log_ei"
    PI = "pi"
    LCB = "lcb"


def _pdf(u):
    return _INV_SQRT_2PI * np.exp(-0.5 * u * u)


def acq_score(
    kind: AcqKind | str,
    mean,
    variance,
    f_best: float,
    kappa: float = 2.0,
    transform_state: TransformState | None = None,
):
    """
    Score predictive (mean, variance) pairs against the incumbent ``f_best``.

    ``mean``/``variance`` may be scalars or arrays. For ``log_ei`` the model is
    fitted on log-transformed targets and ``f_best`` is a raw objective value;
    ``transform_state`` must be the log transform's state.
    """
    kind = AcqKind(kind)
    mu = np.asarray(mean, dtype=float)
    var = np.asarray(variance, dtype=float)
    if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(var)) and np.isfinite(f_best)):
        raise ValueError("acquisition inputs must be finite")
    if np.any(var < 0):
        raise ValueError("predictive variance must be non-negative")
    sigma = np.sqrt(var)
    positive = sigma > 0
    safe_sigma = np.where(positive, sigma, 1.0)

    if kind is AcqKind.LCB:
        if not kappa > 0:
            raise ValueError("LCB kappa must be positive")
        out = -(mu - kappa * sigma)

    elif kind is AcqKind.EI:
        u = (f_best - mu) / safe_sigma
        ei = sigma * (u * ndtr(u) + _pdf(u))
        out = np.where(positive, np.maximum(ei, 0.0), np.maximum(f_best - mu, 0.0))

    elif kind is AcqKind.PI:
        u = (f_best - mu) / safe_sigma
        out = np.where(positive, ndtr(u), (mu < f_best).astype(float))

    else:
        if transform_state is None or transform_state.kind is not TransformKind.LOG:
            raise ValueError("log_ei requires a model fitted on log-transformed targets")
        f_shift = float(transform_state.shifted(f_best))
        if not f_shift > 0:
            raise ValueError("log_ei incumbent must lie above the log transform's floor")
        v = (np.log(f_shift) - mu) / safe_sigma
        lei = f_shift * ndtr(v) - np.exp(mu + 0.5 * var) * ndtr(v - sigma)
        out = np.where(positive, np.maximum(lei, 0.0), np.maximum(f_shift - np.exp(mu), 0.0))

    return float(out) if out.ndim == 0 else out
