"""
Portfolio Bayesian optimization with Kriging Believer batch filling.

Per batch:
  1. shuffle the portfolio,
  2. for each triplet in turn: transform targets (history + fantasies so far),
     fit the surrogate, maximize the acquisition, and record the winner as a
     fantasy observation at the model's predicted mean; a GP reuses the
     hyperparameters fitted earlier in the batch for the same transform,
  3. return the winners; fantasies never reach the history.
"""

import logging
import math
from typing import Sequence

import numpy as np
from numpy.linalg import LinAlgError

from squirrel.bo.acquisitions import AcqKind, acq_score
from squirrel.bo.gp import GPHyperparams, GPModel, build_gp
from squirrel.bo.portfolio import Portfolio, Triplet
from squirrel.bo.surrogates import Surrogate, SurrogateKind, fit_surrogate
from squirrel.bo.transforms import TransformKind, TransformState, apply, invert
from squirrel.errors import FitError
from squirrel.history import History
from squirrel.models import OptimizerSettings
from squirrel.space import ConfigSpace, Configuration, decode, project

logger = logging.getLogger(__name__)

_MAX_FRESH_TRIES = 100


def optimize_acq(
    model: Surrogate,
    transform_state: TransformState,
    acq: AcqKind | str,
    f_best: float,
    space: ConfigSpace,
    rng: np.random.Generator,
    *,
    kappa: float = 2.0,
    starts: np.ndarray | None = None,
    settings: OptimizerSettings | None = None,
) -> np.ndarray:
    """
    Maximize the acquisition over the unit cube.

    Candidates are scored in a fixed order (uniform random points, then chain
    starts, then hill-climbing steps); the first candidate reaching the maximum wins.
    ``starts`` are historical points, best first.
    """
    settings = settings or OptimizerSettings()
    d = space.dim

    def score(U: np.ndarray) -> np.ndarray:
        mean, var = model.predict(U)
        return np.atleast_1d(acq_score(acq, mean, var, f_best, kappa, transform_state))

    candidates = rng.random((settings.n_random_candidates, d))
    scores = score(candidates)
    i = int(np.argmax(scores))
    best_u, best_s = candidates[i].copy(), scores[i]

    if settings.n_local_chains == 0:
        return best_u

    n_starts = settings.n_chain_starts
    pool = np.empty((0, d)) if starts is None else np.asarray(starts, dtype=float)[:n_starts]
    if len(pool) < n_starts:
        pool = np.vstack([pool, rng.random((n_starts - len(pool), d))])

    current = pool[np.arange(settings.n_local_chains) % n_starts].copy()
    current_s = score(current)
    j = int(np.argmax(current_s))
    if current_s[j] > best_s:
        best_u, best_s = current[j].copy(), current_s[j]

    for _ in range(settings.n_local_steps):
        step = rng.normal(0.0, settings.local_step_sigma, size=current.shape)
        proposal = np.clip(current + step, 0.0, 1.0)
        proposal_s = score(proposal)
        improved = proposal_s > current_s
        current[improved] = proposal[improved]
        current_s[improved] = proposal_s[improved]
        j = int(np.argmax(proposal_s))
        if proposal_s[j] > best_s:
            best_u, best_s = proposal[j].copy(), proposal_s[j]

    return best_u


def fantasize(model: Surrogate, transform_state: TransformState, u) -> float:
    """Kriging Believer value: the predicted mean mapped back to raw objective space."""
    mean, _ = model.predict(np.asarray(u, dtype=float)[None, :])
    return float(invert(transform_state, mean[0]))


# ── batch construction ────────────────────────────────────────────────────────

def _is_duplicate(u: np.ndarray, taken: Sequence[np.ndarray], tol: float) -> bool:
    if not len(taken):
        return False
    return bool(np.any(np.max(np.abs(np.asarray(taken) - u), axis=1) <= tol))


def _fresh_point(space: ConfigSpace, rng, taken, tol: float) -> np.ndarray:
    u = project(space, rng.random(space.dim))
    for _ in range(_MAX_FRESH_TRIES):
        if not _is_duplicate(u, taken, tol):
            return u
        u = project(space, rng.random(space.dim))
    logger.warning("Could not find an unused point after %d draws; space may be exhausted", _MAX_FRESH_TRIES)
    return u


def _fit(
    triplet: Triplet,
    X: np.ndarray,
    z: np.ndarray,
    rng: np.random.Generator,
    settings: OptimizerSettings,
    gp_hyperparams: dict[TransformKind, GPHyperparams],
):
    """
    Fit the triplet's surrogate. A GP whose transform was already fitted earlier
    in the batch keeps those hyperparameters and is only conditioned on (X, z).
    """
    if SurrogateKind(triplet.surrogate) is SurrogateKind.GP and triplet.transform in gp_hyperparams:
        return build_gp(X, z, gp_hyperparams[triplet.transform])
    model = fit_surrogate(triplet.surrogate, X, z, rng, settings)
    if isinstance(model, GPModel):
        gp_hyperparams[triplet.transform] = model.hyperparams
    return model


def _propose_one(
    triplet: Triplet,
    X_real: np.ndarray,
    y_real: np.ndarray,
    fantasy_X: list[np.ndarray],
    fantasy_y: list[float],
    space: ConfigSpace,
    rng: np.random.Generator,
    settings: OptimizerSettings,
    gp_hyperparams: dict[TransformKind, GPHyperparams],
):
    """One KB step. Returns (u, model, transform_state); model is None on failure."""
    X = np.vstack([X_real, *fantasy_X]) if fantasy_X else X_real
    y = np.concatenate([y_real, fantasy_y]) if fantasy_y else y_real
    n_real = len(y_real)
    try:
        z, state = apply(triplet.transform, y)
        model = _fit(triplet, X, z, rng, settings, gp_hyperparams)
        if triplet.acquisition is AcqKind.LOG_EI:
            f_best = float(y_real.min())
        else:
            f_best = float(z[:n_real].min())
        starts = X_real[np.argsort(z[:n_real], kind="stable")]
        u = optimize_acq(
            model, state, triplet.acquisition, f_best, space, rng,
            kappa=triplet.kappa, starts=starts, settings=settings,
        )
    except (FitError, LinAlgError, ValueError) as e:
        logger.warning("Triplet %s failed (%s); proposing a random point", triplet.label(), e)
        return rng.random(space.dim), None, None
    logger.debug("Triplet %s proposed %s", triplet.label(), np.round(u, 4))
    return u, model, state


def has_model_signal(history: History) -> bool:
    """BO needs at least two distinct finite objective values."""
    finite = {t.y for t in history if math.isfinite(t.y)}
    return len(finite) >= 2


def propose_batch_bo(
    history: History,
    space: ConfigSpace,
    portfolio: Portfolio,
    rng: np.random.Generator,
    settings: OptimizerSettings | None = None,
) -> list[Configuration]:
    settings = settings or OptimizerSettings()
    tol = settings.duplicate_tol
    taken: list[np.ndarray] = list(history.unit_vectors())
    proposals: list[np.ndarray] = []

    if not has_model_signal(history):
        logger.warning("History has fewer than 2 distinct finite values; BO batch is random")
        for _ in range(settings.batch_size):
            u = _fresh_point(space, rng, taken, tol)
            proposals.append(u)
            taken.append(u)
        return [decode(space, u) for u in proposals]

    order = list(portfolio)
    if settings.shuffle_portfolio:
        order = [order[i] for i in rng.permutation(len(order))]
    logger.info("BO triplet order: %s", ", ".join(t.label() for t in order))

    X_real, y_real = history.design_matrix()
    fantasy_X: list[np.ndarray] = []
    fantasy_y: list[float] = []
    gp_hyperparams: dict[TransformKind, GPHyperparams] = {}
    for k in range(settings.batch_size):
        triplet = order[k % len(order)]
        u, model, state = _propose_one(
            triplet, X_real, y_real, fantasy_X, fantasy_y, space, rng, settings, gp_hyperparams
        )
        u = project(space, u)
        if _is_duplicate(u, taken, tol):
            logger.debug("Triplet %s proposal duplicates an earlier point; replacing", triplet.label())
            u = _fresh_point(space, rng, taken, tol)
        proposals.append(u)
        taken.append(u)
        if model is not None:
            fantasy_X.append(u[None, :])
            fantasy_y.append(fantasize(model, state, u))

    return [decode(space, u) for u in proposals]
