"""Axis-aligned box domains and partitions.

A :class:`Box` is the input domain of every estimator and test in this
package: a product of closed intervals with positive volume.  Partitions
of a box into sub-boxes drive the subdomain tests.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class Box:
    """Axis-aligned box: a tuple of (lower, upper) bounds, one per dimension."""

    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if len(self.bounds) == 0:
            raise DomainError("box needs at least one dimension")
        clean = []
        for lo, hi in self.bounds:
            lo, hi = float(lo), float(hi)
            if not (math.isfinite(lo) and math.isfinite(hi)):
                raise DomainError(f"non-finite bound ({lo}, {hi})")
            if not lo < hi:
                raise DomainError(f"lower bound must be below upper, got ({lo}, {hi})")
            clean.append((lo, hi))
        object.__setattr__(self, "bounds", tuple(clean))

    @classmethod
    def interval(cls, lo: float, hi: float) -> "Box":
        return cls(((lo, hi),))

    @classmethod
    def unit(cls, dim: int) -> "Box":
        return cls(tuple((0.0, 1.0) for _ in range(dim)))

    @property
    def dim(self) -> int:
        return len(self.bounds)

    @property
    def lower(self) -> np.ndarray:
        return np.array([b[0] for b in self.bounds])

    @property
    def upper(self) -> np.ndarray:
        return np.array([b[1] for b in self.bounds])

    @property
    def lengths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def contains(self, points: np.ndarray, atol: float = 0.0) -> np.ndarray:
        """Boolean mask of which points (m, d) lie inside the box."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if pts.shape[1] != self.dim:
            raise DomainError(
                f"points have dimension {pts.shape[1]}, box has {self.dim}"
            )
        lo, hi = self.lower, self.upper
        return np.all((pts >= lo - atol) & (pts <= hi + atol), axis=1)

    def split(self, counts: int | tuple[int, ...]) -> list["Box"]:
        """Partition into an equal grid of sub-boxes, lexicographic order."""
        if isinstance(counts, int):
            counts = (counts,) * self.dim
        if len(counts) != self.dim:
            raise DomainError("one split count per dimension required")
        if any(c < 1 for c in counts):
            raise DomainError("split counts must be >= 1")
        edges = [np.linspace(lo, hi, c + 1) for (lo, hi), c in zip(self.bounds, counts)]
        boxes = []
        for idx in itertools.product(*(range(c) for c in counts)):
            boxes.append(
                Box(tuple((edges[m][i], edges[m][i + 1]) for m, i in enumerate(idx)))
            )
        return boxes

    def __str__(self) -> str:
        return "x".join(f"[{lo:g},{hi:g}]" for lo, hi in self.bounds)


def hull(boxes: list[Box] | tuple[Box, ...]) -> Box:
    """Smallest box containing all the given boxes."""
    if not boxes:
        raise DomainError("empty box list")
    dim = boxes[0].dim
    if any(b.dim != dim for b in boxes):
        raise DomainError("boxes have mixed dimensions")
    lo = np.min([b.lower for b in boxes], axis=0)
    hi = np.max([b.upper for b in boxes], axis=0)
    return Box(tuple(zip(lo, hi)))


def _overlap_volume(a: Box, b: Box) -> float:
    widths = np.minimum(a.upper, b.upper) - np.maximum(a.lower, b.lower)
    if np.any(widths <= 0):
        return 0.0
    return float(np.prod(widths))


def check_partition(boxes: list[Box] | tuple[Box, ...], domain: Box | None = None,
                    tol: float = 1e-9) -> Box:
    """Validate that boxes form a disjoint cover of the domain.

    Disjointness and coverage are checked by volume to the given
    tolerance.  Returns the covered domain (the hull when no explicit
    domain is passed).  Raises :class:`ConfigurationError` on overlap
    or gaps.
    """
    if domain is None:
        domain = hull(boxes)
    scale = domain.volume
    for i, a in enumerate(boxes):
        for b in boxes[i + 1:]:
            if _overlap_volume(a, b) > tol * scale:
                raise ConfigurationError(f"subdomains overlap: {a} and {b}")
    inside = all(
        np.all(b.lower >= domain.lower - tol) and np.all(b.upper <= domain.upper + tol)
        for b in boxes
    )
    total = sum(b.volume for b in boxes)
    if not inside or abs(total - scale) > tol * max(scale, 1.0):
        raise ConfigurationError(
            f"subdomains do not cover the domain: total volume {total:g}, "
            f"domain volume {scale:g}"
        )
    return domain
