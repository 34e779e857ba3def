"""Seeded synthetic clouds and Gaussian noise.

All randomness comes from numpy's Philox-4x32-10 counter-based generator
keyed by ``numpy.random.SeedSequence(seed)``. Sub-streams for different
purposes are derived with :func:`derive_seed` so one user seed drives a
whole run. Outputs match across machines running the same numpy; across
languages only the distributions are comparable.

Shapes are sampled uniformly by area and then rescaled, using their
analytic bounding box, to fit the unit cube centered at the origin.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field

import numpy as np

from .pointcloud import as_cloud

SHAPES = ("plane", "sphere", "torus", "semicircle-strip")

_DEFAULTS = {
    "plane": {"extent": 1.0},
    "sphere": {"radius": 1.0},
    "torus": {"major_radius": 1.0, "minor_radius": 0.35},
    "semicircle-strip": {"radius": 1.0, "half_angle": math.pi / 2, "width": 1.0},
}


def make_rng(seed: int) -> np.random.Generator:
    """Philox generator for a 64-bit seed."""
    seed = int(seed)
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed must fit in 64 unsigned bits, got {seed}")
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def derive_seed(seed: int, purpose: str) -> int:
    """Stable 64-bit child seed of ``seed`` for a named purpose."""
    ss = np.random.SeedSequence([int(seed), zlib.crc32(purpose.encode("utf-8"))])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ShapeSpec:
    kind: str
    n: int
    seed: int = 0
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in SHAPES:
            raise ValueError(f"unknown shape {self.kind!r}; choose from {', '.join(SHAPES)}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n}")
        unknown = set(self.params) - set(_DEFAULTS[self.kind])
        if unknown:
            raise ValueError(f"unknown parameter(s) for {self.kind}: {', '.join(sorted(unknown))}")
        merged = {**_DEFAULTS[self.kind], **{k: float(v) for k, v in self.params.items()}}
        for key, value in merged.items():
            if not np.isfinite(value) or value <= 0:
                raise ValueError(f"{self.kind} {key} must be positive, got {value}")
        if self.kind == "torus" and merged["minor_radius"] >= merged["major_radius"]:
            raise ValueError("torus minor_radius must be smaller than major_radius")
        if self.kind == "semicircle-strip" and merged["half_angle"] > math.pi:
            raise ValueError("semicircle-strip half_angle must not exceed pi")
        object.__setattr__(self, "params", merged)
        object.__setattr__(self, "n", int(self.n))


@dataclass(frozen=True)
class NoiseSpec:
    sigma_n: float
    seed: int = 0

    def __post_init__(self):
        if not np.isfinite(self.sigma_n) or self.sigma_n < 0:
            raise ValueError(f"sigma_n must be non-negative, got {self.sigma_n}")


def _plane(rng, n, extent):
    xy = rng.uniform(-0.5 * extent, 0.5 * extent, size=(n, 2))
    pts = np.column_stack([xy, np.zeros(n)])
    return pts, np.array([-0.5 * extent, -0.5 * extent, 0.0]), np.array([0.5 * extent, 0.5 * extent, 0.0])


def _sphere(rng, n, radius):
    g = rng.standard_normal((n, 3))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return radius * g, np.full(3, -radius), np.full(3, radius)


def _torus(rng, n, major_radius, minor_radius):
    # area element is proportional to (R + r cos v); sample v by rejection
    R, r = major_radius, minor_radius
    vs = []
    have = 0
    while have < n:
        v = rng.uniform(0.0, 2 * math.pi, size=2 * (n - have) + 16)
        accept = rng.uniform(0.0, R + r, size=v.size) < R + r * np.cos(v)
        vs.append(v[accept])
        have += int(accept.sum())
    v = np.concatenate(vs)[:n]
    u = rng.uniform(0.0, 2 * math.pi, size=n)
    ring = R + r * np.cos(v)
    pts = np.column_stack([ring * np.cos(u), ring * np.sin(u), r * np.sin(v)])
    hi = np.array([R + r, R + r, r])
    return pts, -hi, hi


def _semicircle_strip(rng, n, radius, half_angle, width):
    theta = rng.uniform(-half_angle, half_angle, size=n)
    z = rng.uniform(-0.5 * width, 0.5 * width, size=n)
    pts = np.column_stack([radius * np.sin(theta), radius - radius * np.cos(theta), z])
    xmax = radius * math.sin(min(half_angle, math.pi / 2))
    lo = np.array([-xmax, 0.0, -0.5 * width])
    hi = np.array([xmax, radius - radius * math.cos(half_angle), 0.5 * width])
    return pts, lo, hi


_SAMPLERS = {"plane": _plane, "sphere": _sphere, "torus": _torus, "semicircle-strip": _semicircle_strip}


def unit_cube_transform(lo: np.ndarray, hi: np.ndarray) -> tuple[np.ndarray, float]:
    """Center and scale mapping the box ``[lo, hi]`` into the unit cube at the origin."""
    center = 0.5 * (lo + hi)
    scale = 1.0 / float(np.max(hi - lo))
    return center, scale


def sample_shape(spec: ShapeSpec) -> np.ndarray:
    """``spec.n`` points on the analytic surface, rescaled into the unit cube."""
    rng = make_rng(spec.seed)
    pts, lo, hi = _SAMPLERS[spec.kind](rng, spec.n, **spec.params)
    center, scale = unit_cube_transform(lo, hi)
    return (pts - center) * scale


def add_gaussian_noise(cloud, spec: NoiseSpec) -> np.ndarray:
    """Add i.i.d. ``N(0, sigma_n^2)`` offsets to every coordinate."""
    pts = as_cloud(cloud)
    if spec.sigma_n == 0:
        return pts.copy()
    rng = make_rng(spec.seed)
    return pts + rng.normal(0.0, spec.sigma_n, size=pts.shape)
