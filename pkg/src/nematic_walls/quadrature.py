"""Composite Gauss-Legendre quadrature helpers."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np


@lru_cache(maxsize=None)
def gauss_legendre(order: int):
    """Nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    return x, w


def composite_nodes(a: float, b: float, panels: int, order: int):
    """Nodes/weights of panel-composite Gauss-Legendre on [a, b], flattened."""
    x, w = gauss_legendre(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def integrate(f: Callable[[np.ndarray], np.ndarray], a: float, b: float,
              panels: int = 16, order: int = 8) -> float:
    nodes, weights = composite_nodes(a, b, panels, order)
    return float(np.dot(weights, f(nodes)))
