"""
Gaussian-process surrogate on unit-cube inputs.

Matérn-5/2 ARD kernel with a constant mean; targets are standardized inside
the fit and destandardized on predict. Hyperparameters maximize the log
marginal likelihood via random-restart L-BFGS-B in log-hyperparameter space.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from numpy.linalg import LinAlgError
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

from squirrel.errors import FitError

logger = logging.getLogger(__name__)

SQRT5 = np.sqrt(5.0)
LOG_2PI = np.log(2.0 * np.pi)

LENGTHSCALE_BOUNDS = (1e-3, 1e3)
SIGNAL_VAR_BOUNDS = (1e-2, 1e2)
NOISE_VAR_BOUNDS = (1e-10, 1e-6)
MEAN_BOUNDS = (-3.0, 3.0)
JITTER_LADDER = tuple(1e-8 * 10.0**k for k in range(7))  # 1e-8 … 1e-2


@dataclass(frozen=True)
class GPHyperparams:
    lengthscales: np.ndarray
    signal_var: float
    noise_var: float
    mean: float

    def to_theta(self) -> np.ndarray:
        return np.concatenate([
            np.log(self.lengthscales),
            [np.log(self.signal_var), np.log(self.noise_var), self.mean],
        ])

    @classmethod
    def from_theta(cls, theta: np.ndarray) -> "GPHyperparams":
        d = len(theta) - 3
        return cls(
            lengthscales=np.exp(theta[:d]),
            signal_var=float(np.exp(theta[d])),
            noise_var=float(np.exp(theta[d + 1])),
            mean=float(theta[d + 2]),
        )


@dataclass(frozen=True)
class GPModel:
    X: np.ndarray
    alpha: np.ndarray
    chol: np.ndarray
    hyperparams: GPHyperparams
    jitter: float
    y_mean: float
    y_std: float
    log_marginal_likelihood: float
    start_log_likelihoods: tuple[float, ...] = field(default_factory=tuple)

    def predict(self, Xq) -> tuple[np.ndarray, np.ndarray]:
        """Posterior mean and latent variance at each row of ``Xq``."""
        Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
        hp = self.hyperparams
        Ks = matern52(Xq, self.X, hp.lengthscales, hp.signal_var)
        mean = hp.mean + Ks @ self.alpha
        v = solve_triangular(self.chol, Ks.T, lower=True, check_finite=False)
        var = np.maximum(hp.signal_var - np.sum(v * v, axis=0), 0.0)
        return mean * self.y_std + self.y_mean, var * self.y_std**2


# ── kernel ────────────────────────────────────────────────────────────────────

def matern52(A: np.ndarray, B: np.ndarray, lengthscales, signal_var: float) -> np.ndarray:
    A_ = A / lengthscales
    B_ = B / lengthscales
    r2 = np.sum(A_ * A_, axis=1)[:, None] + np.sum(B_ * B_, axis=1)[None, :] - 2.0 * A_ @ B_.T
    r = np.sqrt(np.maximum(r2, 0.0))
    return signal_var * (1.0 + SQRT5 * r + (5.0 / 3.0) * r * r) * np.exp(-SQRT5 * r)


def _stable_cholesky(K: np.ndarray, noise_var: float) -> tuple[np.ndarray, float]:
    diag = np.diag_indices_from(K)
    for jitter in JITTER_LADDER:
        A = K.copy()
        A[diag] += noise_var + jitter
        try:
            L = cholesky(A, lower=True, check_finite=False)
            if np.all(np.isfinite(L)):
                return L, jitter
        except LinAlgError:
            continue
    raise FitError(
        f"kernel matrix is not positive definite even with jitter {JITTER_LADDER[-1]:g} "
        f"(n={K.shape[0]}, noise_var={noise_var:g}); inputs are likely near-duplicates"
    )


# ── marginal likelihood ───────────────────────────────────────────────────────

def _pairwise_sq_diff(X: np.ndarray) -> np.ndarray:
    """Per-dimension squared differences of every row pair, shape (n*n, d)."""
    n, d = X.shape
    return ((X[:, None, :] - X[None, :, :]) ** 2).reshape(n * n, d)


def _neg_lml(theta: np.ndarray, sq_diff: np.ndarray, z: np.ndarray) -> tuple[float, np.ndarray]:
    """
    Negative log marginal likelihood and its gradient w.r.t. theta.

    ``sq_diff`` comes from ``_pairwise_sq_diff``.
    """
    n = len(z)
    d = sq_diff.shape[1]
    inv_ls2 = np.exp(-2.0 * theta[:d])
    signal_var = np.exp(theta[d])
    noise_var = np.exp(theta[d + 1])
    mean = theta[d + 2]

    r = np.sqrt(sq_diff @ inv_ls2).reshape(n, n)
    e = np.exp(-SQRT5 * r)
    Kf = signal_var * (1.0 + SQRT5 * r + (5.0 / 3.0) * r * r) * e

    try:
        L, _ = _stable_cholesky(Kf, noise_var)
    except FitError:
        return 1e25, np.zeros_like(theta)

    L_inv = solve_triangular(L, np.eye(n), lower=True, check_finite=False)
    K_inv = L_inv.T @ L_inv
    resid = z - mean
    alpha = K_inv @ resid
    lml = -0.5 * resid @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * n * LOG_2PI

    W = np.outer(alpha, alpha) - K_inv
    dK_common = signal_var * (5.0 / 3.0) * (1.0 + SQRT5 * r) * e

    grad = np.empty_like(theta)
    grad[:d] = 0.5 * ((W * dK_common).ravel() @ sq_diff) * inv_ls2
    grad[d] = 0.5 * np.sum(W * Kf)
    grad[d + 1] = 0.5 * noise_var * np.trace(W)
    grad[d + 2] = alpha.sum()
    return -float(lml), -grad


def _theta_bounds(d: int) -> list[tuple[float, float]]:
    return (
        [tuple(np.log(LENGTHSCALE_BOUNDS))] * d
        + [tuple(np.log(SIGNAL_VAR_BOUNDS)), tuple(np.log(NOISE_VAR_BOUNDS)), MEAN_BOUNDS]
    )


def _initial_thetas(d: int, n_restarts: int, rng: np.random.Generator) -> list[np.ndarray]:
    default = GPHyperparams(
        lengthscales=np.full(d, 0.5), signal_var=1.0, noise_var=1e-8, mean=0.0
    ).to_theta()
    starts = [default]
    for _ in range(n_restarts - 1):
        starts.append(np.concatenate([
            rng.uniform(np.log(1e-2), np.log(1e1), size=d),
            [rng.uniform(np.log(0.1), np.log(10.0)),
             rng.uniform(*np.log(NOISE_VAR_BOUNDS)),
             rng.uniform(-1.0, 1.0)],
        ]))
    return starts


# ── public API ────────────────────────────────────────────────────────────────

def _standardize(z: np.ndarray) -> tuple[np.ndarray, float, float]:
    y_mean = float(z.mean())
    y_std = float(z.std())
    if not y_std > 1e-12:
        y_std = 1.0
    return (z - y_mean) / y_std, y_mean, y_std


def build_gp(X, z, hyperparams: GPHyperparams, start_log_likelihoods=()) -> GPModel:
    """Condition a GP with fixed hyperparameters on (X, z)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    z = np.asarray(z, dtype=float)
    if len(z) < 1:
        raise ValueError("a GP needs at least one training point")
    zs, y_mean, y_std = _standardize(z)

    Kf = matern52(X, X, hyperparams.lengthscales, hyperparams.signal_var)
    L, jitter = _stable_cholesky(Kf, hyperparams.noise_var)
    resid = zs - hyperparams.mean
    alpha = cho_solve((L, True), resid, check_finite=False)
    lml = -0.5 * resid @ alpha - np.sum(np.log(np.diag(L))) - 0.5 * len(z) * LOG_2PI
    return GPModel(
        X=X,
        alpha=alpha,
        chol=L,
        hyperparams=hyperparams,
        jitter=jitter,
        y_mean=y_mean,
        y_std=y_std,
        log_marginal_likelihood=float(lml),
        start_log_likelihoods=tuple(start_log_likelihoods),
    )


def fit_gp(X, z, rng: np.random.Generator, n_restarts: int = 32, maxiter: int = 20) -> GPModel:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    z = np.asarray(z, dtype=float)
    if len(z) < 1:
        raise ValueError("a GP needs at least one training point")
    d = X.shape[1]
    zs, _, _ = _standardize(z)
    sq_diff = _pairwise_sq_diff(X)
    bounds = _theta_bounds(d)

    best_theta, best_value = None, np.inf
    start_lmls: list[float] = []
    for theta0 in _initial_thetas(d, n_restarts, rng):
        f0, _ = _neg_lml(theta0, sq_diff, zs)
        start_lmls.append(-f0)
        theta, value = theta0, f0
        try:
            res = minimize(
                _neg_lml, theta0, args=(sq_diff, zs), jac=True,
                method="L-BFGS-B", bounds=bounds, options={"maxiter": maxiter},
            )
            if np.isfinite(res.fun) and res.fun <= f0:
                theta, value = res.x, float(res.fun)
        except (LinAlgError, ValueError) as e:
            logger.debug("GP restart failed: %s", e)
        if value < best_value:
            best_theta, best_value = theta, value

    if best_theta is None or best_value >= 1e25:
        raise FitError(f"no restart produced a usable GP (n={len(z)}, d={d})")

    model = build_gp(X, z, GPHyperparams.from_theta(best_theta), start_lmls)
    logger.debug(
        "GP fit: n=%d d=%d lml=%.4f noise=%.3g", len(z), d,
        model.log_marginal_likelihood, model.hyperparams.noise_var,
    )
    return model


def predict_gp(model: GPModel, x) -> tuple[float, float]:
    mean, var = model.predict(np.asarray(x, dtype=float)[None, :])
    return float(mean[0]), float(var[0])
