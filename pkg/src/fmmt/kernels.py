"""Isotropic Matern kernel and Gram matrices.

The kernel is parameterized by a smoothness ``nu`` and a length scale
``theta`` and normalized so that K(0) = 1.  Half-integer ``nu`` uses the
polynomial-times-exponential closed form; any other ``nu > 0`` falls back
to the modified Bessel function of the second kind.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import gamma as gamma_fn
from scipy.special import kve

from .errors import DomainError

try:
    from numba import njit, prange

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def deco(fn):
            return fn
        return deco

    prange = range

_HALF_INTEGER_TOL = 1e-12


@dataclass(frozen=True)
class MaternParams:
    """Matern kernel parameters: smoothness nu > 0, length scale theta > 0."""

    nu: float
    theta: float

    def __post_init__(self):
        nu, theta = float(self.nu), float(self.theta)
        if not (math.isfinite(nu) and nu > 0):
            raise DomainError(f"nu must be finite and > 0, got {self.nu}")
        if not (math.isfinite(theta) and theta > 0):
            raise DomainError(f"theta must be finite and > 0, got {self.theta}")
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "theta", theta)

    @property
    def half_integer_order(self) -> int | None:
        """p such that nu = p + 1/2, or None when nu is not half-integer."""
        p = round(self.nu - 0.5)
        if p >= 0 and abs(self.nu - (p + 0.5)) <= _HALF_INTEGER_TOL:
            return p
        return None


@lru_cache(maxsize=None)
def _half_integer_poly(p: int) -> tuple[float, ...]:
    """Coefficients b_0..b_p with K(r) = exp(-s) * sum_i b_i s^i, s = sqrt(2 nu) r / theta."""
    lead = math.factorial(p) / math.factorial(2 * p)
    coeffs = [0.0] * (p + 1)
    for i in range(p + 1):
        power = p - i
        comb = math.factorial(p + i) / (math.factorial(i) * math.factorial(p - i))
        coeffs[power] += lead * comb * 2.0 ** power
    return tuple(coeffs)


def matern_eval(r, params: MaternParams):
    """Evaluate the Matern kernel at distance(s) r >= 0.

    Returns values in (0, 1] with K(0) = 1.  Accepts scalars or arrays.
    """
    arr = np.asarray(r, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError("distances must be finite")
    if np.any(arr < 0):
        raise DomainError("distances must be nonnegative")
    s = arr * (math.sqrt(2.0 * params.nu) / params.theta)
    p = params.half_integer_order
    if p is not None:
        poly = np.zeros_like(s)
        for b in reversed(_half_integer_poly(p)):
            poly = poly * s + b
        out = poly * np.exp(-s)
    else:
        const = 2.0 ** (1.0 - params.nu) / gamma_fn(params.nu)
        with np.errstate(invalid="ignore"):
            out = const * s ** params.nu * kve(params.nu, s) * np.exp(-s)
        out = np.where(s == 0.0, 1.0, out)
    out = np.minimum(out, 1.0)
    return out if arr.ndim else float(out)


def kernel_matrix(A: np.ndarray, B: np.ndarray, params: MaternParams) -> np.ndarray:
    """Gram matrix K[i, j] = K(||a_i - b_j||) for point sets A (m, d), B (l, d)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.shape[1] != B.shape[1]:
        raise DomainError(
            f"point sets have mismatched dimensions {A.shape[1]} and {B.shape[1]}"
        )
    return matern_eval(cdist(A, B), params)


@njit(cache=True, parallel=True, fastmath=True)
def _matvec_half_integer(pts, centers, weights, scale, poly):  # pragma: no cover - jit
    m, d = pts.shape
    n = centers.shape[0]
    deg = poly.shape[0] - 1
    out = np.empty(m)
    for i in prange(m):
        acc = 0.0
        for j in range(n):
            r2 = 0.0
            for k in range(d):
                diff = pts[i, k] - centers[j, k]
                r2 += diff * diff
            s = np.sqrt(r2) * scale
            val = poly[deg]
            for q in range(deg - 1, -1, -1):
                val = val * s + poly[q]
            acc += weights[j] * val * np.exp(-s)
        out[i] = acc
    return out


def matern_matvec(pts: np.ndarray, centers: np.ndarray, weights: np.ndarray,
                  params: MaternParams) -> np.ndarray:
    """K(pts, centers) @ weights without materializing the full Gram matrix.

    Uses a fused JIT path for half-integer nu on large point sets; falls
    back to chunked dense evaluation otherwise.
    """
    pts = np.ascontiguousarray(np.atleast_2d(np.asarray(pts, dtype=float)))
    centers = np.ascontiguousarray(np.atleast_2d(np.asarray(centers, dtype=float)))
    weights = np.ascontiguousarray(np.asarray(weights, dtype=float))
    p = params.half_integer_order
    if _HAVE_NUMBA and p is not None and pts.shape[0] * centers.shape[0] > 200_000:
        scale = math.sqrt(2.0 * params.nu) / params.theta
        poly = np.array(_half_integer_poly(p))
        return _matvec_half_integer(pts, centers, weights, scale, poly)
    out = np.empty(pts.shape[0])
    chunk = max(1, 4_000_000 // max(1, centers.shape[0]))
    for start in range(0, pts.shape[0], chunk):
        block = pts[start:start + chunk]
        out[start:start + chunk] = kernel_matrix(block, centers, params) @ weights
    return out
