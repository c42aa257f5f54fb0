"""Kernel ridge regression with Matern kernels.

Fits solve (K + n*lambda*I) w = Y by Cholesky factorization with a small
escalating diagonal jitter.  The smoother matrix S = K (K + n*lambda*I)^-1
supplies the effective degrees of freedom used by the residual noise
variance estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh, LinAlgError

from .errors import DomainError, NumericalError
from .kernels import MaternParams, kernel_matrix, matern_matvec

JITTER_START = 1e-10
JITTER_CAP = 1e-6
DEFAULT_CV_GRID = np.logspace(-9.0, 0.0, 25)


@dataclass(frozen=True)
class KrrFit:
    """Fitted kernel ridge regressor."""

    centers: np.ndarray
    weights: np.ndarray
    lam: float
    params: MaternParams
    sigma_hat: float
    edf: float
    jitter: float

    @property
    def n(self) -> int:
        return self.centers.shape[0]

    def __call__(self, x) -> np.ndarray:
        return predict(self, x)


def _as_points(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2:
        raise DomainError("points must be an (n, d) array")
    return X


def _factor_with_jitter(A: np.ndarray, rhs: np.ndarray, rhs_scale: float):
    """Solve A x = rhs with escalating diagonal jitter; returns (x, factor, jitter)."""
    n = A.shape[0]
    jitter = JITTER_START
    while True:
        try:
            factor = cho_factor(A + jitter * np.eye(n), lower=True)
            x = cho_solve(factor, rhs)
            resid = np.linalg.norm((A + jitter * np.eye(n)) @ x - rhs)
            if np.all(np.isfinite(x)) and resid <= 1e-8 * max(rhs_scale, 1e-300):
                return x, factor, jitter
        except LinAlgError:
            pass
        if jitter >= JITTER_CAP:
            raise NumericalError(
                f"factorization failed with jitter escalated to {jitter:g}"
            )
        jitter *= 10.0


def fit_krr(X, Y, params: MaternParams, lam: float) -> KrrFit:
    """Fit KRR on (X, Y) with regularization lam >= 0.

    The returned fit carries the residual noise s.d. estimate and the
    effective degrees of freedom tr(S).
    """
    X = _as_points(X)
    Y = np.asarray(Y, dtype=float).ravel()
    n = X.shape[0]
    if n < 1 or Y.shape[0] != n:
        raise DomainError("X and Y must be nonempty and of matching length")
    if lam < 0:
        raise DomainError("lambda must be >= 0")
    K = kernel_matrix(X, X, params)
    A = K + n * lam * np.eye(n)
    weights, factor, jitter = _factor_with_jitter(A, Y, np.linalg.norm(Y))
    edf = float(np.sum(K * cho_solve(factor, np.eye(n))))
    fitted = K @ weights
    rss = float(np.sum((Y - fitted) ** 2))
    sigma2 = rss / (n - edf) if edf < n - 1e-9 else rss / n
    fit = KrrFit(
        centers=X,
        weights=weights,
        lam=float(lam),
        params=params,
        sigma_hat=math.sqrt(max(sigma2, 0.0)),
        edf=edf,
        jitter=jitter,
    )
    return fit


def predict(fit: KrrFit, x) -> np.ndarray | float:
    """Predict at one point (d,) or a batch (m, d)."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1 and fit.centers.shape[1] == arr.shape[0]
    pts = arr[None, :] if single else _as_points(arr)
    if pts.shape[1] != fit.centers.shape[1]:
        raise DomainError(
            f"point dimension {pts.shape[1]} does not match fit dimension "
            f"{fit.centers.shape[1]}"
        )
    out = matern_matvec(pts, fit.centers, fit.weights, fit.params)
    return float(out[0]) if single else out


def noise_variance(fit: KrrFit, X, Y) -> float:
    """Residual variance estimate RSS / (n - tr(S)), falling back to RSS / n.

    The fallback engages when the effective degrees of freedom reach n
    (interpolation regime), following the stability convention of the
    smoother-based estimator.
    """
    X = _as_points(X)
    Y = np.asarray(Y, dtype=float).ravel()
    n = Y.shape[0]
    rss = float(np.sum((Y - predict(fit, X)) ** 2))
    if fit.edf < n - 1e-9:
        return rss / (n - fit.edf)
    return rss / n


def cross_validate_lambda(X, Y, params: MaternParams, c_grid=None, folds: int = 5,
                          seed: int = 0) -> float:
    """Select lambda = C*/n by k-fold cross-validation over a grid of C values.

    Fold assignment is a deterministic round-robin over a seeded shuffle.
    Ties in mean out-of-fold squared error break toward the larger C
    (more regularization).
    """
    X = _as_points(X)
    Y = np.asarray(Y, dtype=float).ravel()
    n = X.shape[0]
    if c_grid is None:
        c_grid = DEFAULT_CV_GRID
    c_grid = np.sort(np.asarray(c_grid, dtype=float))
    if c_grid.size == 0:
        raise DomainError("empty cross-validation grid")
    if folds < 2:
        raise DomainError("folds must be >= 2")
    if n < folds:
        raise DomainError(f"need at least {folds} observations for {folds}-fold CV")
    if c_grid.size == 1:
        return float(c_grid[0]) / n

    perm = np.random.default_rng(seed).permutation(n)
    fold_of = np.empty(n, dtype=int)
    fold_of[perm] = np.arange(n) % folds

    # lambda = C / n_train makes the regularized system K + C*I on every fold,
    # so one eigendecomposition per fold serves the whole grid.
    sse = np.zeros(c_grid.size)
    for f in range(folds):
        test = fold_of == f
        train = ~test
        K_tr = kernel_matrix(X[train], X[train], params)
        K_te = kernel_matrix(X[test], X[train], params)
        evals, evecs = eigh(K_tr)
        vty = evecs.T @ Y[train]
        for i, c in enumerate(c_grid):
            w = evecs @ (vty / (evals + c + JITTER_START))
            sse[i] += float(np.sum((K_te @ w - Y[test]) ** 2))
    best = int(np.flatnonzero(sse == sse.min())[-1])
    return float(c_grid[best]) / n


def loo_theta(X, Y, nu: float = 3.5, theta_grid=(0.25, 0.5, 1.0, 2.0, 4.0)) -> MaternParams:
    """Pick the length scale minimizing leave-one-out interpolation error.

    Used to build interpolating surrogates (lambda = 0) from small
    simulator designs.
    """
    X = _as_points(X)
    Y = np.asarray(Y, dtype=float).ravel()
    n = X.shape[0]
    if n < 2:
        raise DomainError("need at least two points to select a length scale")
    best_params, best_err = None, np.inf
    for theta in theta_grid:
        params = MaternParams(nu, theta)
        err = 0.0
        for i in range(n):
            mask = np.arange(n) != i
            fit = fit_krr(X[mask], Y[mask], params, 0.0)
            err += (predict(fit, X[i]) - Y[i]) ** 2
        if err < best_err:
            best_params, best_err = params, err
    return best_params


def fit_interpolator(X, Y, nu: float = 3.5, theta: float | None = None) -> KrrFit:
    """Interpolating (lambda = 0) KRR fit; theta from LOO CV when omitted."""
    params = MaternParams(nu, theta) if theta is not None else loo_theta(X, Y, nu)
    return fit_krr(X, Y, params, 0.0)
