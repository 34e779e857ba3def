"""Wall-time scaling of the denoiser at fixed sampling density."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .denoise import DenoiseParams, denoise_wmp
from .graph import build_graph
from .synth import derive_seed, make_rng


@dataclass(frozen=True)
class BenchRow:
    n: int
    mean_degree: float
    seconds: float

    @property
    def model(self) -> float:
        """Cost model ``N (log N + k)`` with ``k`` the mean neighbor count."""
        return self.n * (math.log(self.n) + self.mean_degree)


def fixed_density_cloud(n: int, density: float, noise: float, seed: int) -> np.ndarray:
    """Noisy square planar patch holding ``density`` points per unit area."""
    rng = make_rng(seed)
    side = math.sqrt(n / density)
    xy = rng.uniform(0.0, side, size=(n, 2))
    z = rng.normal(0.0, noise, size=n)
    return np.column_stack([xy, z])


def run_benchmark(sizes, epsilon: float = 0.05, density: float = 4000.0, noise: float = 0.002,
                  repeats: int = 3, seed: int = 0) -> list[BenchRow]:
    """Time :func:`denoise_wmp` (graph, planes and projections) for each size.

    The best of ``repeats`` runs is kept.
    """
    params = DenoiseParams(epsilon=epsilon)
    rows = []
    for n in sizes:
        cloud = fixed_density_cloud(int(n), density, noise, derive_seed(seed, f"bench-{n}"))
        best = math.inf
        for _ in range(max(1, repeats)):
            start = time.perf_counter()
            denoise_wmp(cloud, params)
            best = min(best, time.perf_counter() - start)
        degree = float(build_graph(cloud, epsilon).degrees.mean())
        rows.append(BenchRow(n=int(n), mean_degree=degree, seconds=best))
    return rows


def fit_envelope(rows) -> tuple[float, np.ndarray]:
    """Least-squares (log space) constant ``c`` in ``t = c N (log N + k)``.

    Returns ``c`` and the per-row ratios ``t / (c * model)``; a perfect fit
    gives all ones.
    """
    t = np.array([r.seconds for r in rows])
    model = np.array([r.model for r in rows])
    c = float(np.exp(np.mean(np.log(t / model))))
    return c, t / (c * model)


def bench_csv(rows) -> str:
    c, ratio = fit_envelope(rows)
    lines = ["n,mean_degree,seconds,model,fit_ratio"]
    for r, q in zip(rows, ratio):
        lines.append(f"{r.n},{r.mean_degree:.6g},{r.seconds:.6g},{r.model:.6g},{q:.6g}")
    return "\n".join(lines) + "\n"
