"""epsilon-neighborhood graph with row-normalized Gaussian weights."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .pointcloud import NeighborIndex, as_cloud, build_index, radius_pairs

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NeighborGraph:
    """Per-point neighbor lists stored in CSR layout.

    Row ``i`` spans ``indices[indptr[i]:indptr[i+1]]``; its column ids are
    sorted ascending and always contain ``i``. ``weights`` is aligned with
    ``indices`` and every row sums to one.
    """

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    distances: np.ndarray
    epsilon: float
    sigma: float

    @property
    def n_points(self) -> int:
        return self.indptr.size - 1

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def rows(self) -> np.ndarray:
        """Row id of every stored edge, aligned with ``indices``."""
        return np.repeat(np.arange(self.n_points, dtype=np.intp), self.degrees)

    @property
    def isolated(self) -> np.ndarray:
        """Ids of points whose only neighbor is themselves."""
        return np.flatnonzero(self.degrees == 1)

    def neighborhood(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        return neighborhood(self, i)


def default_sigma(epsilon: float) -> float:
    """Kernel width used when the caller gives none: half the radius."""
    return 0.5 * float(epsilon)


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be a positive finite number, got {value}")
    return value


def build_graph(cloud, epsilon: float, sigma: float | None = None,
                index: NeighborIndex | None = None) -> NeighborGraph:
    """Connect every pair within distance ``epsilon`` and weight it by a Gaussian kernel.

    ``W_ij = exp(-d_ij**2 / (2 sigma**2)) / Z_i`` where ``Z_i`` sums the kernel
    over the neighbors of ``i`` only, so each row is a probability vector.
    ``sigma`` defaults to ``epsilon / 2``.
    """
    epsilon = _check_positive("epsilon", epsilon)
    sigma = default_sigma(epsilon) if sigma is None else _check_positive("sigma", sigma)
    if index is None:
        index = build_index(cloud)
    else:
        as_cloud(cloud)
    n = index.n_points

    rows, cols, dist = radius_pairs(index, epsilon)
    kernel = np.exp(-(dist * dist) / (2.0 * sigma * sigma))
    z = np.bincount(rows, weights=kernel, minlength=n)
    weights = kernel / z[rows]
    indptr = np.zeros(n + 1, dtype=np.intp)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])

    graph = NeighborGraph(indptr=indptr, indices=cols, weights=weights, distances=dist,
                          epsilon=epsilon, sigma=sigma)
    isolated = graph.isolated
    if isolated.size:
        logger.info("%d isolated point(s) at epsilon=%g (first id %d)",
                    isolated.size, epsilon, int(isolated[0]))
    return graph


def neighborhood(graph: NeighborGraph, i: int) -> tuple[np.ndarray, np.ndarray]:
    """Aligned ``(ids, weights)`` views for point ``i``."""
    i = int(i)
    if not 0 <= i < graph.n_points:
        raise IndexError(f"point id {i} out of range for a graph of {graph.n_points} points")
    lo, hi = graph.indptr[i], graph.indptr[i + 1]
    return graph.indices[lo:hi], graph.weights[lo:hi]
