"""Weighted-PCA tangent planes.

The normal at point ``i`` is the unit eigenvector for the smallest eigenvalue
of the weighted covariance of its neighbors; the intercept is ``a . mean``.
Covariances are accumulated in centered form, which equals the raw
second-moment form whenever the weights sum to one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .graph import NeighborGraph, neighborhood
from .pointcloud import as_cloud

logger = logging.getLogger(__name__)

MIN_NEIGHBORS = 3
# components smaller than this do not decide the sign of a normal
_SIGN_TOL = 1e-12
# relative eigenvalue gap below which the smallest eigenvalue is called degenerate
_DEGENERATE_GAP = 1e-12


class UnderdeterminedPlaneError(ValueError):
    """Raised when a neighborhood has fewer than three points."""


class EigenPair(NamedTuple):
    value: float
    vector: np.ndarray
    degenerate: bool


@dataclass(frozen=True)
class TangentPlane:
    """The plane ``{t : normal . t = intercept}`` estimated at point ``owner``."""

    normal: np.ndarray
    intercept: float
    owner: int = -1

    def signed_distance(self, p) -> float:
        return float(np.dot(self.normal, p) - self.intercept)


@dataclass(frozen=True)
class PlaneTable:
    """Planes for every point of a cloud.

    ``valid[i]`` is False where the neighborhood was too small to define a
    plane; such rows hold a zero normal and must be treated as identity
    projections. ``degenerate[i]`` marks a repeated smallest eigenvalue.
    """

    normals: np.ndarray
    intercepts: np.ndarray
    means: np.ndarray
    eigenvalues: np.ndarray
    valid: np.ndarray
    degenerate: np.ndarray

    def __len__(self) -> int:
        return self.normals.shape[0]

    def plane(self, i: int) -> TangentPlane:
        if not self.valid[i]:
            raise UnderdeterminedPlaneError(f"no plane at point {i}: fewer than {MIN_NEIGHBORS} neighbors")
        return TangentPlane(self.normals[i].copy(), float(self.intercepts[i]), int(i))


def canonical_sign(v: np.ndarray) -> np.ndarray:
    """Flip vectors (last axis) so their first non-negligible component is positive."""
    v = np.asarray(v, dtype=np.float64)
    big = np.abs(v) > _SIGN_TOL
    first = np.argmax(big, axis=-1)
    lead = np.take_along_axis(v, first[..., None], axis=-1)[..., 0]
    sign = np.where(lead < 0, -1.0, 1.0)
    return v * sign[..., None]


def _pick_degenerate(vectors: np.ndarray, values: np.ndarray, tol: float) -> np.ndarray:
    # lexicographically largest canonical vector among the tied eigenvectors
    tied = [canonical_sign(vectors[:, k]) for k in range(values.size) if values[k] - values[0] <= tol]
    return max(tied, key=lambda v: tuple(v))


def _smallest_batch(mats: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    values, vectors = np.linalg.eigh(mats)
    scale = np.max(np.abs(values), axis=-1)
    tol = _DEGENERATE_GAP * scale
    degenerate = (values[:, 1] - values[:, 0]) <= tol
    normals = canonical_sign(vectors[:, :, 0])
    for k in np.flatnonzero(degenerate):
        normals[k] = _pick_degenerate(vectors[k], values[k], tol[k])
    return values[:, 0], normals, degenerate


def smallest_eigenvector_sym3(m) -> EigenPair:
    """Smallest eigenvalue of a symmetric 3x3 matrix and its unit eigenvector.

    The vector is sign-canonical. ``degenerate`` is set when the two smallest
    eigenvalues agree to ``1e-12`` relative to the spectral radius; the vector
    is then one deterministic choice from the tied eigenspace.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (3, 3):
        raise ValueError(f"expected a 3x3 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if not np.allclose(m, m.T, rtol=0, atol=1e-12 * max(1.0, np.abs(m).max())):
        raise ValueError("matrix is not symmetric")
    m = 0.5 * (m + m.T)
    value, vector, degenerate = _smallest_batch(m[None])
    if degenerate[0]:
        logger.debug("degenerate smallest eigenvalue %g", value[0])
    return EigenPair(float(value[0]), vector[0], bool(degenerate[0]))


def weighted_mean(cloud, graph: NeighborGraph, i: int) -> np.ndarray:
    ids, w = neighborhood(graph, i)
    return w @ np.asarray(cloud, dtype=np.float64)[ids]


def weighted_covariance(cloud, graph: NeighborGraph, i: int) -> np.ndarray:
    """Weighted covariance ``sum_j W_ij (p_j - mean)(p_j - mean)^T`` of point ``i``'s neighbors."""
    ids, w = neighborhood(graph, i)
    pts = np.asarray(cloud, dtype=np.float64)[ids]
    centered = pts - w @ pts
    return (centered * w[:, None]).T @ centered


def fit_objective(points, weights, normal, intercept: float | None = None) -> float:
    """Weighted squared distance ``sum_j w_j (a . p_j - c)^2`` to a plane.

    With ``intercept`` omitted the optimal one, ``a . mean``, is used.
    """
    points = np.asarray(points, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    normal = np.asarray(normal, dtype=np.float64)
    proj = points @ normal
    if intercept is None:
        intercept = float(weights @ proj) / float(weights.sum())
    return float(weights @ (proj - intercept) ** 2)


def estimate_plane(cloud, graph: NeighborGraph, i: int) -> TangentPlane:
    ids, _ = neighborhood(graph, i)
    if ids.size < MIN_NEIGHBORS:
        raise UnderdeterminedPlaneError(
            f"underdetermined plane at point {i}: {ids.size} neighbor(s), need {MIN_NEIGHBORS}")
    mean = weighted_mean(cloud, graph, i)
    pair = smallest_eigenvector_sym3(weighted_covariance(cloud, graph, i))
    return TangentPlane(pair.vector, float(pair.vector @ mean), int(i))


def batch_covariances(cloud, graph: NeighborGraph) -> tuple[np.ndarray, np.ndarray]:
    """Weighted means ``(N, 3)`` and centered covariances ``(N, 3, 3)`` for every point."""
    pts = as_cloud(cloud)
    n = graph.n_points
    if pts.shape[0] != n:
        raise ValueError(f"cloud has {pts.shape[0]} points but the graph has {n}")
    rows, cols, w = graph.rows, graph.indices, graph.weights
    nbr = pts[cols]
    means = np.stack([np.bincount(rows, weights=w * nbr[:, k], minlength=n) for k in range(3)], axis=1)
    diff = nbr - means[rows]
    wdiff = diff * w[:, None]
    cov = np.empty((n, 3, 3))
    for a in range(3):
        for b in range(a, 3):
            cov[:, a, b] = np.bincount(rows, weights=wdiff[:, a] * diff[:, b], minlength=n)
            cov[:, b, a] = cov[:, a, b]
    return means, cov


def estimate_planes(cloud, graph: NeighborGraph) -> PlaneTable:
    """Estimate the tangent plane of every point in one vectorized pass."""
    means, cov = batch_covariances(cloud, graph)
    values, normals, degenerate = _smallest_batch(cov)
    valid = graph.degrees >= MIN_NEIGHBORS
    normals[~valid] = 0.0
    intercepts = np.einsum("ij,ij->i", normals, means)
    if not valid.all():
        logger.info("%d point(s) with fewer than %d neighbors keep their position",
                    int((~valid).sum()), MIN_NEIGHBORS)
    if degenerate[valid].any():
        logger.debug("%d degenerate neighborhood spectra", int(degenerate[valid].sum()))
    return PlaneTable(normals=normals, intercepts=intercepts, means=means, eigenvalues=values,
                      valid=valid, degenerate=degenerate & valid)
