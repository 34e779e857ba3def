"""Point cloud arrays and exact radius queries.

A point cloud is an ``(N, 3)`` float64 array; row ``i`` is point ``i``.
The index wraps :class:`scipy.spatial.cKDTree` but re-checks every candidate
with an explicit Euclidean distance so results equal a brute-force scan,
boundary included.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

# candidate radius is widened by this factor before the exact re-check
_SLACK = 1e-9


class EmptyInputError(ValueError):
    """Raised when an operation receives a cloud with no points."""

    def __init__(self, what: str = "cloud"):
        super().__init__(f"empty input: {what} has no points")


def worker_count() -> int:
    """Worker cap from ``WMP_THREADS``; defaults to the CPU count."""
    raw = os.environ.get("WMP_THREADS", "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError:
            raise ValueError(f"WMP_THREADS must be a positive integer, got {raw!r}") from None
        if value < 1:
            raise ValueError(f"WMP_THREADS must be a positive integer, got {raw!r}")
        return value
    return os.cpu_count() or 1


def as_cloud(points, dim: int = 3) -> np.ndarray:
    """Validate and return ``points`` as a C-contiguous ``(N, dim)`` float64 array."""
    arr = np.ascontiguousarray(points, dtype=np.float64)
    if arr.ndim == 1 and arr.size == dim:
        arr = arr.reshape(1, dim)
    if arr.ndim != 2 or arr.shape[1] != dim:
        raise ValueError(f"expected an (N, {dim}) array of points, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise EmptyInputError()
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr).all(axis=1))[0])
        raise ValueError(f"point {bad} has a non-finite coordinate")
    return arr


def pairwise_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Row-wise Euclidean distance ``||a - b||`` with broadcasting.

    The squares are summed left to right so ties at the query radius resolve
    the same way as a plain scalar loop.
    """
    diff = np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)
    sq = diff * diff
    total = sq[..., 0]
    for k in range(1, diff.shape[-1]):
        total = total + sq[..., k]
    return np.sqrt(total)


@dataclass(frozen=True)
class NeighborIndex:
    """Immutable radius-search structure over one cloud."""

    points: np.ndarray
    tree: cKDTree = field(repr=False)

    @property
    def n_points(self) -> int:
        return self.points.shape[0]


def build_index(cloud) -> NeighborIndex:
    points = as_cloud(cloud).copy()
    points.setflags(write=False)
    return NeighborIndex(points=points, tree=cKDTree(points))


def _check_radius(radius: float) -> float:
    radius = float(radius)
    if not np.isfinite(radius) or radius < 0:
        raise ValueError(f"radius must be a finite non-negative number, got {radius}")
    return radius


def _widen(radius: float) -> float:
    return np.nextafter(radius * (1.0 + _SLACK), np.inf)


def radius_query_arrays(index: NeighborIndex, center, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Ids and distances of all points within ``radius`` of ``center``.

    Returns two aligned arrays sorted by point id. The boundary is inclusive.
    """
    radius = _check_radius(radius)
    center = np.asarray(center, dtype=np.float64).reshape(3)
    cand = np.asarray(index.tree.query_ball_point(center, _widen(radius)), dtype=np.intp)
    cand.sort()
    dist = pairwise_distance(index.points[cand], center)
    keep = dist <= radius
    return cand[keep], dist[keep]


def radius_query(index: NeighborIndex, center, radius: float) -> list[tuple[int, float]]:
    """List of ``(point_id, distance)`` with ``distance <= radius``, sorted by id."""
    ids, dist = radius_query_arrays(index, center, radius)
    return [(int(i), float(d)) for i, d in zip(ids, dist)]


def radius_pairs(index: NeighborIndex, radius: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All ordered pairs ``(i, j)`` with ``||p_i - p_j|| <= radius``, self pairs included.

    Returns ``(rows, cols, dist)`` sorted by row then column.
    """
    radius = _check_radius(radius)
    pts = index.points
    upper = index.tree.query_pairs(_widen(radius), output_type="ndarray")
    if upper.size:
        d = pairwise_distance(pts[upper[:, 0]], pts[upper[:, 1]])
        keep = d <= radius
        upper, d = upper[keep], d[keep]
    else:
        upper = np.empty((0, 2), dtype=np.intp)
        d = np.empty(0)
    n = pts.shape[0]
    self_ids = np.arange(n, dtype=np.intp)
    rows = np.concatenate([self_ids, upper[:, 0], upper[:, 1]])
    cols = np.concatenate([self_ids, upper[:, 1], upper[:, 0]])
    dist = np.concatenate([np.zeros(n), d, d])
    order = np.lexsort((cols, rows))
    return rows[order], cols[order], dist[order]


def nearest_sq_distances(index: NeighborIndex, queries, workers: int | None = None) -> np.ndarray:
    """Squared distance from each query point to its nearest indexed point."""
    queries = as_cloud(queries)
    _, nn = index.tree.query(queries, k=1, workers=workers or worker_count())
    diff = queries - index.points[nn]
    return np.einsum("ij,ij->i", diff, diff)
