"""Weighted multi-projection denoising.

Pass one estimates a tangent plane at every point from the noisy cloud.
Pass two projects each point onto the planes of all its neighbors and
averages the projections with the graph weights. Planes stay frozen during
pass two. One-time projection (each point onto its own plane only) is kept
as a baseline.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .graph import NeighborGraph, build_graph, default_sigma, neighborhood
from .pointcloud import as_cloud
from .tangent import MIN_NEIGHBORS, PlaneTable, TangentPlane, estimate_planes

logger = logging.getLogger(__name__)

Strategy = Literal["one-time", "multi"]
_STRATEGY_ALIASES = {"one": "one-time", "one-time": "one-time", "onetime": "one-time",
                     "multi": "multi", "wmp": "multi"}


@dataclass(frozen=True)
class DenoiseParams:
    """Hyperparameters of a denoising run.

    ``iterations`` repeats the whole pipeline on its own output, rebuilding the
    graph and planes each round; the default of one is a single pass.
    """

    epsilon: float
    sigma: float | None = None
    strategy: Strategy = "multi"
    iterations: int = 1

    def __post_init__(self):
        eps = float(self.epsilon)
        if not np.isfinite(eps) or eps <= 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.sigma is None:
            object.__setattr__(self, "sigma", default_sigma(eps))
        elif not np.isfinite(self.sigma) or self.sigma <= 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        strategy = _STRATEGY_ALIASES.get(str(self.strategy).lower())
        if strategy is None:
            raise ValueError(f"unknown strategy {self.strategy!r}; use 'one-time' or 'multi'")
        object.__setattr__(self, "strategy", strategy)
        if int(self.iterations) != self.iterations or self.iterations < 1:
            raise ValueError(f"iterations must be a positive integer, got {self.iterations}")
        object.__setattr__(self, "epsilon", eps)
        object.__setattr__(self, "sigma", float(self.sigma))
        object.__setattr__(self, "iterations", int(self.iterations))


def project_to_plane(p, plane: TangentPlane) -> np.ndarray:
    """Closest point to ``p`` on ``plane``: ``p - (a . p) a + c a``."""
    p = np.asarray(p, dtype=np.float64)
    a = plane.normal
    return p - (a @ p) * a + plane.intercept * a


def _project_own(points: np.ndarray, planes: PlaneTable) -> np.ndarray:
    offset = np.einsum("ij,ij->i", planes.normals, points) - planes.intercepts
    out = points - offset[:, None] * planes.normals
    out[~planes.valid] = points[~planes.valid]
    return out


def _project_multi(points: np.ndarray, planes: PlaneTable, graph: NeighborGraph) -> np.ndarray:
    rows, cols, w = graph.rows, graph.indices, graph.weights
    a = planes.normals[cols]
    # invalid planes carry a zero normal, so they act as identity projections
    offset = np.einsum("ij,ij->i", a, points[rows]) - planes.intercepts[cols]
    shift = (w * offset)[:, None] * a
    n = points.shape[0]
    total = np.stack([np.bincount(rows, weights=shift[:, k], minlength=n) for k in range(3)], axis=1)
    out = points - total
    sparse = graph.degrees < MIN_NEIGHBORS
    out[sparse] = points[sparse]
    return out


def multi_project(cloud, planes: PlaneTable, graph: NeighborGraph, i: int) -> np.ndarray:
    """Weighted average of the projections of point ``i`` onto its neighbors' planes.

    This average is the unique minimizer of ``sum_j W_ij ||p - t_j||^2``.
    Neighbors without a plane contribute the point itself.
    """
    points = np.asarray(cloud, dtype=np.float64)
    p = points[i]
    ids, w = neighborhood(graph, i)
    if ids.size < MIN_NEIGHBORS:
        return p.copy()
    proj = np.empty((ids.size, 3))
    for k, j in enumerate(ids):
        proj[k] = project_to_plane(p, planes.plane(j)) if planes.valid[j] else p
    return w @ proj


def _one_round(points: np.ndarray, params: DenoiseParams) -> np.ndarray:
    graph = build_graph(points, params.epsilon, params.sigma)
    planes = estimate_planes(points, graph)
    if params.strategy == "one-time":
        return _project_own(points, planes)
    return _project_multi(points, planes, graph)


def denoise(cloud, params: DenoiseParams) -> np.ndarray:
    """Run ``params.strategy`` for ``params.iterations`` rounds; returns a new array."""
    points = as_cloud(cloud)
    for round_ in range(params.iterations):
        points = _one_round(points, params)
        logger.debug("round %d/%d done (%s)", round_ + 1, params.iterations, params.strategy)
    return points


def denoise_one_time(cloud, params: DenoiseParams) -> np.ndarray:
    """Project every point onto its own estimated tangent plane."""
    return denoise(cloud, _with_strategy(params, "one-time"))


def denoise_wmp(cloud, params: DenoiseParams) -> np.ndarray:
    """Weighted multi-projection: average of projections onto neighbor planes."""
    return denoise(cloud, _with_strategy(params, "multi"))


def _with_strategy(params: DenoiseParams, strategy: Strategy) -> DenoiseParams:
    if params.strategy == strategy:
        return params
    return DenoiseParams(params.epsilon, params.sigma, strategy, params.iterations)
