"""Gaussian-process regression over the unit cube.

Matern 5/2 kernel with per-dimension (ARD) lengthscales, learned noise with a
hard floor, outputs standardized to zero mean / unit variance. Hyperparameters
are chosen by maximizing the log marginal likelihood with a multi-start
quasi-Newton ascent on analytic gradients. Inputs are expected to be
pre-scaled to [0, 1]^d by the caller; predictions are de-standardized back to
the original output units and include the learned observation noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from scipy.optimize import minimize

__all__ = [
    "NOISE_FLOOR",
    "GpFitError",
    "KernelParams",
    "GpModel",
    "Posterior",
    "kernel_matern52",
    "log_marginal_likelihood",
    "fit",
    "build_model",
    "predict",
    "predict_batch",
]

NOISE_FLOOR = 1e-10

_SQRT5 = math.sqrt(5.0)
# Escalation ladder applied to K + noise*I when the factorization fails.
_JITTERS = (0.0, 1e-10, 1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4)

# Log-uniform sampling ranges for multi-start initial points.
_START_LENGTHSCALE = (1e-2, 10.0)
_START_SIGNAL_VAR = (1e-2, 1e2)
_START_NOISE_VAR = (1e-8, 1e-2)

# Box constraints for the optimizer, in log space.
_BOUND_LENGTHSCALE = (math.log(1e-3), math.log(1e3))
_BOUND_SIGNAL_VAR = (math.log(1e-8), math.log(1e4))
_BOUND_NOISE_VAR = (math.log(NOISE_FLOOR), math.log(1e1))


class GpFitError(RuntimeError):
    """Raised when the kernel matrix cannot be factorized or the fit fails.

    `jitter` carries the largest diagonal jitter that was attempted.
    """

    def __init__(self, message: str, jitter: float | None = None):
        super().__init__(message)
        self.jitter = jitter


@dataclass(frozen=True)
class KernelParams:
    """Kernel hyperparameters in log space."""

    log_lengthscales: np.ndarray
    log_signal_variance: float
    log_noise_variance: float

    def __post_init__(self) -> None:
        ls = np.asarray(self.log_lengthscales, dtype=float)
        object.__setattr__(self, "log_lengthscales", ls)
        if ls.ndim != 1 or ls.size < 1:
            raise ValueError("log_lengthscales must be a 1-d vector")
        if not np.all(np.isfinite(ls)):
            raise ValueError("log_lengthscales must be finite")
        if not math.isfinite(self.log_signal_variance):
            raise ValueError("log_signal_variance must be finite")
        if not math.isfinite(self.log_noise_variance):
            raise ValueError("log_noise_variance must be finite")
        if self.log_noise_variance < math.log(NOISE_FLOOR) - 1e-12:
            raise ValueError(f"log_noise_variance below the noise floor log({NOISE_FLOOR})")

    @property
    def dim(self) -> int:
        return self.log_lengthscales.size

    @property
    def lengthscales(self) -> np.ndarray:
        return np.exp(self.log_lengthscales)

    @property
    def signal_variance(self) -> float:
        return math.exp(self.log_signal_variance)

    @property
    def noise_variance(self) -> float:
        return math.exp(self.log_noise_variance)

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.log_lengthscales, [self.log_signal_variance, self.log_noise_variance]])

    @staticmethod
    def from_vector(theta: np.ndarray) -> "KernelParams":
        theta = np.asarray(theta, dtype=float)
        return KernelParams(theta[:-2].copy(), float(theta[-2]), float(theta[-1]))


@dataclass(frozen=True, eq=False)
class GpModel:
    """Fitted posterior state: hyperparameters, data and Cholesky factor."""

    params: KernelParams
    train_x: np.ndarray
    train_y_standardized: np.ndarray
    y_mean: float
    y_std: float
    chol: np.ndarray
    alpha: np.ndarray

    @property
    def n_train(self) -> int:
        return self.train_x.shape[0]

    @property
    def dim(self) -> int:
        return self.train_x.shape[1]


@dataclass(frozen=True)
class Posterior:
    """Predictive normal at one point, in original output units."""

    mean: float
    std: float

    def __post_init__(self) -> None:
        if not (self.std >= 0.0):
            raise ValueError(f"std must be >= 0, got {self.std}")


def kernel_matern52(a: np.ndarray, b: np.ndarray, params: KernelParams) -> float:
    """Matern 5/2 covariance between two points in the unit cube.

    k(a, b) = sv * (1 + sqrt(5) r + 5 r^2 / 3) * exp(-sqrt(5) r) with r the
    lengthscale-weighted Euclidean distance.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.size != params.dim or b.size != params.dim:
        raise ValueError(f"points of dim {a.size}/{b.size} do not match {params.dim} lengthscales")
    scaled = (a - b) / params.lengthscales
    sq = float(scaled @ scaled)
    r = math.sqrt(sq)
    return params.signal_variance * (1.0 + _SQRT5 * r + (5.0 / 3.0) * sq) * math.exp(-_SQRT5 * r)


def _scaled_sq_diffs(x: np.ndarray, lengthscales: np.ndarray) -> np.ndarray:
    """Per-dimension squared scaled differences, shape (n, n, d)."""
    diff = (x[:, None, :] - x[None, :, :]) / lengthscales
    return diff * diff


def _matern52_from_sq(sq: np.ndarray, signal_variance: float) -> np.ndarray:
    r = np.sqrt(sq)
    return signal_variance * (1.0 + _SQRT5 * r + (5.0 / 3.0) * sq) * np.exp(-_SQRT5 * r)


def _cross_kernel(a: np.ndarray, b: np.ndarray, params: KernelParams) -> np.ndarray:
    """Kernel matrix between row sets a (m, d) and b (n, d)."""
    ls = params.lengthscales
    asq = a / ls
    bsq = b / ls
    sq = np.sum(asq * asq, axis=1)[:, None] + np.sum(bsq * bsq, axis=1)[None, :] - 2.0 * asq @ bsq.T
    np.maximum(sq, 0.0, out=sq)
    return _matern52_from_sq(sq, params.signal_variance)


def _chol_with_jitter(k_noisy: np.ndarray) -> tuple[np.ndarray, float]:
    """Lower Cholesky of a noisy kernel matrix, escalating diagonal jitter."""
    n = k_noisy.shape[0]
    last = 0.0
    for jitter in _JITTERS:
        last = jitter
        try:
            L = cholesky(k_noisy + jitter * np.eye(n), lower=True, check_finite=False)
            return L, jitter
        except np.linalg.LinAlgError:
            continue
    raise GpFitError(
        f"Cholesky factorization failed up to jitter {last:g}", jitter=last
    )


def log_marginal_likelihood(
    params: KernelParams, train_x: np.ndarray, train_y_standardized: np.ndarray
) -> tuple[float, np.ndarray]:
    """Log marginal likelihood and its gradient w.r.t. all log-parameters.

    Value: -0.5 y' a - sum(log diag L) - (n/2) log 2 pi with a = (K + sv_n I)^-1 y.
    Gradient order matches KernelParams.to_vector().
    """
    x = np.asarray(train_x, dtype=float)
    y = np.asarray(train_y_standardized, dtype=float)
    n, d = x.shape
    if d != params.dim:
        raise ValueError(f"train_x dim {d} does not match {params.dim} lengthscales")

    sq_dims = _scaled_sq_diffs(x, params.lengthscales)
    return _lml_core(params, sq_dims, y)


def _lml_core(
    params: KernelParams, sq_dims: np.ndarray, y: np.ndarray
) -> tuple[float, np.ndarray]:
    """LML value/gradient given precomputed per-dimension squared diffs."""
    n = y.size
    sv = params.signal_variance
    nv = params.noise_variance
    sq = sq_dims.sum(axis=2)
    r = np.sqrt(sq)
    decay = np.exp(-_SQRT5 * r)
    k = sv * (1.0 + _SQRT5 * r + (5.0 / 3.0) * sq) * decay
    k_noisy = k + nv * np.eye(n)

    L, _ = _chol_with_jitter(k_noisy)
    alpha = cho_solve((L, True), y, check_finite=False)
    value = -0.5 * float(y @ alpha) - float(np.sum(np.log(np.diag(L)))) - 0.5 * n * math.log(2.0 * math.pi)

    # W = alpha alpha' - K^-1; d(lml)/d(theta_j) = 0.5 tr(W dK/d(theta_j)).
    k_inv = cho_solve((L, True), np.eye(n), check_finite=False)
    w = np.outer(alpha, alpha) - k_inv

    grad = np.empty(params.dim + 2)
    # dK/d(log ls_k) = sv * (5/3)(1 + sqrt(5) r) exp(-sqrt(5) r) * sq_dims[..., k]
    envelope = sv * (5.0 / 3.0) * (1.0 + _SQRT5 * r) * decay
    we = w * envelope
    for j in range(params.dim):
        grad[j] = 0.5 * float(np.sum(we * sq_dims[:, :, j]))
    grad[-2] = 0.5 * float(np.sum(w * k))        # dK/d(log sv) = K
    grad[-1] = 0.5 * nv * float(np.trace(w))     # dK/d(log nv) = nv I
    return value, grad


def _standardize(y: np.ndarray) -> tuple[np.ndarray, float, float]:
    y_mean = float(np.mean(y))
    y_std = float(np.std(y))
    if y_std < 1e-12:
        y_std = 1.0
    return (y - y_mean) / y_std, y_mean, y_std


def _validate_inputs(train_x: np.ndarray, train_y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(train_x, dtype=float)
    y = np.asarray(train_y, dtype=float).ravel()
    if x.ndim != 2:
        raise ValueError("train_x must be an (n, d) matrix")
    if x.shape[0] != y.size:
        raise ValueError("train_x and train_y disagree on n")
    if not np.all(np.isfinite(x)):
        raise ValueError("train_x must be finite")
    if not np.all(np.isfinite(y)):
        raise ValueError("train_y must be finite")
    if np.any(x < -1e-8) or np.any(x > 1.0 + 1e-8):
        raise ValueError("train_x must lie in the unit cube")
    return x, y


def build_model(train_x: np.ndarray, train_y: np.ndarray, params: KernelParams) -> GpModel:
    """Assemble a model at fixed hyperparameters (no likelihood ascent)."""
    x, y = _validate_inputs(train_x, train_y)
    if x.shape[1] != params.dim:
        raise ValueError(f"train_x dim {x.shape[1]} does not match {params.dim} lengthscales")
    y_s, y_mean, y_std = _standardize(y)
    sq_dims = _scaled_sq_diffs(x, params.lengthscales)
    k = _matern52_from_sq(sq_dims.sum(axis=2), params.signal_variance)
    L, _ = _chol_with_jitter(k + params.noise_variance * np.eye(x.shape[0]))
    alpha = cho_solve((L, True), y_s, check_finite=False)
    return GpModel(
        params=params,
        train_x=x,
        train_y_standardized=y_s,
        y_mean=y_mean,
        y_std=y_std,
        chol=L,
        alpha=alpha,
    )


def fit(
    train_x: np.ndarray,
    train_y: np.ndarray,
    restarts: int = 8,
    rng: np.random.Generator | int | None = None,
) -> GpModel:
    """Fit kernel hyperparameters by multi-start likelihood ascent.

    Runs `restarts` bounded L-BFGS ascents from log-uniform initial points
    drawn from `rng` and keeps the best final likelihood (first winner on
    ties). Deterministic given (data, restarts, seed).
    """
    x, y = _validate_inputs(train_x, train_y)
    n, d = x.shape
    if n < 2:
        raise ValueError("need at least 2 training points")
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    rng = np.random.default_rng(rng)

    y_s, y_mean, y_std = _standardize(y)

    # Squared coordinate differences do not depend on the hyperparameters;
    # scale them per objective evaluation instead of rebuilding.
    raw_sq = (x[:, None, :] - x[None, :, :]) ** 2

    def objective(theta: np.ndarray) -> tuple[float, np.ndarray]:
        params = KernelParams.from_vector(theta)
        ls2 = np.exp(2.0 * params.log_lengthscales)
        try:
            value, grad = _lml_core(params, raw_sq / ls2, y_s)
        except GpFitError:
            return 1e25, np.zeros(d + 2)
        return -value, -grad

    starts = np.column_stack(
        [
            rng.uniform(math.log(_START_LENGTHSCALE[0]), math.log(_START_LENGTHSCALE[1]), size=(restarts, d)),
            rng.uniform(math.log(_START_SIGNAL_VAR[0]), math.log(_START_SIGNAL_VAR[1]), size=(restarts, 1)),
            rng.uniform(math.log(_START_NOISE_VAR[0]), math.log(_START_NOISE_VAR[1]), size=(restarts, 1)),
        ]
    )
    bounds = [_BOUND_LENGTHSCALE] * d + [_BOUND_SIGNAL_VAR, _BOUND_NOISE_VAR]

    best_theta = None
    best_neg = math.inf
    for i in range(restarts):
        result = minimize(
            objective,
            starts[i],
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": 200},
        )
        if result.fun < best_neg:
            best_neg = float(result.fun)
            best_theta = np.asarray(result.x, dtype=float)
    if best_theta is None or not math.isfinite(best_neg):
        raise GpFitError("all likelihood ascents failed")

    return build_model(x, y, KernelParams.from_vector(best_theta))


def _posterior_arrays(model: GpModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Means and stds (original units) at unit-cube rows x, shape (m, d)."""
    k_star = _cross_kernel(x, model.train_x, model.params)
    mean_s = k_star @ model.alpha
    v = solve_triangular(model.chol, k_star.T, lower=True, check_finite=False)
    prior_var = model.params.signal_variance + model.params.noise_variance
    var_s = prior_var - np.einsum("ij,ij->j", v, v)
    np.maximum(var_s, 0.0, out=var_s)
    means = model.y_mean + model.y_std * mean_s
    stds = model.y_std * np.sqrt(var_s)
    return means, stds


def predict_batch(model: GpModel, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior means and stds at a batch of unit-cube points."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[1] != model.dim:
        raise ValueError(f"expected an (m, {model.dim}) matrix, got shape {x.shape}")
    return _posterior_arrays(model, x)


def predict(model: GpModel, x: np.ndarray) -> Posterior:
    """Posterior at one unit-cube point, de-standardized, noise included."""
    x = np.asarray(x, dtype=float).ravel()
    if x.size != model.dim:
        raise ValueError(f"point of dim {x.size} does not match model dim {model.dim}")
    means, stds = _posterior_arrays(model, x[None, :])
    return Posterior(mean=float(means[0]), std=float(stds[0]))
