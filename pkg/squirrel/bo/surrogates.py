"""
Surrogate dispatch: both model types expose ``predict(X) -> (mean, variance)``.
"""

from enum import Enum
from typing import Protocol

import numpy as np

from squirrel.bo.forest import RFModel, fit_rf
from squirrel.bo.gp import GPModel, fit_gp
from squirrel.models import OptimizerSettings


class SurrogateKind(str, Enum):
    GP = "gp"
    RF = "rf"


class Surrogate(Protocol):
    def predict(self, Xq) -> tuple[np.ndarray, np.ndarray]: ...


def fit_surrogate(
    kind: SurrogateKind | str,
    X: np.ndarray,
    z: np.ndarray,
    rng: np.random.Generator,
    settings: OptimizerSettings | None = None,
) -> GPModel | RFModel:
    settings = settings or OptimizerSettings()
    if SurrogateKind(kind) is SurrogateKind.GP:
        return fit_gp(X, z, rng, n_restarts=settings.gp_restarts, maxiter=settings.gp_maxiter)
    return fit_rf(
        X, z, rng,
        n_trees=settings.rf_trees,
        min_leaf_size=settings.rf_min_leaf_size,
        n_thresholds=settings.rf_n_thresholds,
    )
