"""Point cloud denoising by weighted multi-projection onto estimated tangent planes."""

from .denoise import DenoiseParams, denoise, denoise_one_time, denoise_wmp, multi_project, project_to_plane
from .graph import NeighborGraph, build_graph, neighborhood
from .metrics import MetricReport, chamfer, evaluate, mse, snr
from .pointcloud import EmptyInputError, NeighborIndex, build_index, radius_query
from .synth import NoiseSpec, ShapeSpec, add_gaussian_noise, sample_shape
from .tangent import (PlaneTable, TangentPlane, UnderdeterminedPlaneError, estimate_plane, estimate_planes,
                      smallest_eigenvector_sym3, weighted_covariance, weighted_mean)

__version__ = "0.1.0"

__all__ = [
    "DenoiseParams", "denoise", "denoise_one_time", "denoise_wmp", "multi_project", "project_to_plane",
    "NeighborGraph", "build_graph", "neighborhood",
    "MetricReport", "chamfer", "evaluate", "mse", "snr",
    "EmptyInputError", "NeighborIndex", "build_index", "radius_query",
    "NoiseSpec", "ShapeSpec", "add_gaussian_noise", "sample_shape",
    "PlaneTable", "TangentPlane", "UnderdeterminedPlaneError", "estimate_plane", "estimate_planes",
    "smallest_eigenvector_sym3", "weighted_covariance", "weighted_mean",
]
