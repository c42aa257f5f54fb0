"""Composite Gauss-Legendre quadrature on boxes.

All integrals in the package run over tensor grids built here, so that
every consumer (basis inner products, density normalization, coefficient
integrals) shares one deterministic scheme.
"""

from __future__ import annotations

import numpy as np

from .domain import Box
from .errors import DomainError

NODES_PER_PANEL = 8


def panel_rule(lo: float, hi: float, n_points: int,
               nodes_per_panel: int = NODES_PER_PANEL) -> tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre rule on [lo, hi] with at least n_points nodes.

    Returns (nodes, weights); the node count is rounded up to a whole
    number of panels.
    """
    if n_points < 1:
        raise DomainError("n_points must be >= 1")
    n_panels = -(-n_points // nodes_per_panel)
    base_x, base_w = np.polynomial.legendre.leggauss(nodes_per_panel)
    edges = np.linspace(lo, hi, n_panels + 1)
    half = np.diff(edges) / 2.0
    mid = (edges[:-1] + edges[1:]) / 2.0
    nodes = (mid[:, None] + half[:, None] * base_x[None, :]).ravel()
    weights = (half[:, None] * base_w[None, :]).ravel()
    return nodes, weights


def tensor_rule(box: Box, points_per_dim: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """One composite rule per dimension of the box."""
    return [panel_rule(lo, hi, points_per_dim) for lo, hi in box.bounds]


def grid_points(axes: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Flattened (N, d) tensor grid from per-dimension rules, C order."""
    mesh = np.meshgrid(*(nodes for nodes, _ in axes), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def grid_weights(axes: list[tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Flattened tensor-product weights matching :func:`grid_points`."""
    w = axes[0][1]
    for _, wm in axes[1:]:
        w = np.multiply.outer(w, wm)
    return w.ravel()


def integrate_on_grid(values: np.ndarray, axes: list[tuple[np.ndarray, np.ndarray]]) -> float:
    """Integral of values sampled on the tensor grid of the given rules."""
    return float(values.ravel() @ grid_weights(axes))
