"""Orthonormal Fourier bases on boxes.

On an interval (a, b) of length L the elements are 1/sqrt(L),
sqrt(2/L) cos(2 pi k (x-a)/L), and sqrt(2/L) sin(2 pi k (x-a)/L);
boxes use tensor products.  Each element carries a total frequency
(the sum of its per-dimension frequencies) and a decay weight
rho = 1 / log(k+2)^ell used by the maximum-modulus statistic.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .domain import Box
from .errors import DomainError

PHASES = ("const", "cos", "sin")
_PHASE_RANK = {p: i for i, p in enumerate(PHASES)}


@dataclass(frozen=True)
class BasisIndex:
    """One tensor-product Fourier element: per-dimension (frequency, phase)."""

    per_dim: tuple[tuple[int, str], ...]
    total_frequency: int
    decay_weight: float

    def __post_init__(self):
        for k, phase in self.per_dim:
            if phase not in PHASES:
                raise DomainError(f"unknown phase {phase!r}")
            if (phase == "const") != (k == 0):
                raise DomainError("phase 'const' is exactly the k = 0 element")
        if self.total_frequency != sum(k for k, _ in self.per_dim):
            raise DomainError("total_frequency must equal the sum of frequencies")

    @property
    def dim(self) -> int:
        return len(self.per_dim)

    def label(self) -> str:
        return "*".join(f"{phase}{k if k else ''}" for k, phase in self.per_dim)


def decay_weight(k: int, ell: float) -> float:
    """rho = 1 / [log(k+2)]^ell (natural log); requires ell > 0.5."""
    if ell <= 0.5:
        raise DomainError(f"decay exponent must be > 0.5, got {ell}")
    if k < 0:
        raise DomainError("frequency must be >= 0")
    return math.log(k + 2.0) ** (-ell)


def default_kmax(n: int) -> int:
    """Default truncation frequency floor(sqrt(n))."""
    if n < 1:
        raise DomainError("sample size must be >= 1")
    return math.isqrt(n)


def elements_1d(k_max: int) -> list[tuple[int, str]]:
    """Canonical 1D element order: const, then cos/sin per frequency."""
    out = [(0, "const")]
    for k in range(1, k_max + 1):
        out.append((k, "cos"))
        out.append((k, "sin"))
    return out


def enumerate_basis(k_max: int, d: int, ell: float = 0.7) -> list[BasisIndex]:
    """All tensor elements with total frequency <= k_max, deterministic order.

    Order: ascending total frequency, then lexicographic in the
    interleaved sequence (k_1, phase_1, k_2, phase_2, ...) with phase
    order const < cos < sin.
    """
    if k_max < 0:
        raise DomainError("k_max must be >= 0")
    if d < 1:
        raise DomainError("dimension must be >= 1")
    pool = elements_1d(k_max)
    combos = [
        combo for combo in itertools.product(pool, repeat=d)
        if sum(k for k, _ in combo) <= k_max
    ]

    def key(combo):
        total = sum(k for k, _ in combo)
        inter = tuple(x for k, p in combo for x in (k, _PHASE_RANK[p]))
        return (total, inter)

    combos.sort(key=key)
    return [
        BasisIndex(
            per_dim=combo,
            total_frequency=sum(k for k, _ in combo),
            decay_weight=decay_weight(sum(k for k, _ in combo), ell),
        )
        for combo in combos
    ]


def _eval_1d(k: int, phase: str, x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    length = hi - lo
    if phase == "const":
        return np.full_like(x, 1.0 / math.sqrt(length))
    arg = 2.0 * math.pi * k * (x - lo) / length
    amp = math.sqrt(2.0 / length)
    return amp * (np.cos(arg) if phase == "cos" else np.sin(arg))


def basis_table_1d(k_max: int, x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """(2*k_max + 1, len(x)) values of all 1D elements in canonical order."""
    x = np.asarray(x, dtype=float)
    return np.stack([_eval_1d(k, p, x, lo, hi) for k, p in elements_1d(k_max)])


def basis_eval(idx: BasisIndex, x, box: Box) -> np.ndarray | float:
    """Evaluate a basis element at point(s) inside the box."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1 and box.dim == arr.shape[0] or (arr.ndim == 0 and box.dim == 1)
    pts = np.atleast_1d(arr).reshape(1, -1) if single else np.atleast_2d(arr)
    if idx.dim != box.dim or pts.shape[1] != box.dim:
        raise DomainError("basis element, box, and points must share one dimension")
    if not np.all(box.contains(pts)):
        raise DomainError("evaluation point outside the box")
    out = np.ones(pts.shape[0])
    for m, ((k, phase), (lo, hi)) in enumerate(zip(idx.per_dim, box.bounds)):
        out *= _eval_1d(k, phase, pts[:, m], lo, hi)
    return float(out[0]) if single else out


def basis_eval_extended(idx: BasisIndex, x, box: Box) -> np.ndarray | float:
    """Evaluate with the zero extension: 0 at points outside the box."""
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1 and box.dim == arr.shape[0] or (arr.ndim == 0 and box.dim == 1)
    pts = np.atleast_1d(arr).reshape(1, -1) if single else np.atleast_2d(arr)
    inside = box.contains(pts)
    out = np.zeros(pts.shape[0])
    if np.any(inside):
        out[inside] = np.atleast_1d(basis_eval(idx, pts[inside], box))
    return float(out[0]) if single else out
