"""Two-dimensional error analysis on a sampled circular arc.

Points ``p_i = (r sin t_i, r - r cos t_i)`` with ``t_i = eps * i / r`` for
``i = -N..N`` lie on the circle of radius ``r`` centered at ``(0, r)``; the
origin ``p_0`` has true normal ``(0, 1)``. This module builds the clean and
noisy 2x2 covariances at ``p_0``, evaluates normal-error bounds, gives the
closed-form one-time and multi-projection errors, and simulates both
projection strategies directly for comparison.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .synth import NoiseSpec, make_rng

logger = logging.getLogger(__name__)

HALF_PI = 0.5 * math.pi
_DEGENERATE_GAP = 1e-12
# below this value of L*kappa the closed forms switch to their Taylor series
_SERIES_CUTOFF = 0.2

_E_ONE_SERIES = (1 / 6, -1 / 120, 1 / 5040, -1 / 362880, 1 / 39916800, -1 / 6227020800)
_E_MULTI_SERIES = (1 / 45, -1 / 315, 1 / 4725, -4 / 467775, 2 / 8513505, -1 / 212837625,
                   1 / 13956067125, -8 / 9280784638125)


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class SemicircleModel:
    """Arc samples with radius ``r``, spacing ``eps`` and ``2 * n_half + 1`` points."""

    r: float
    eps: float
    n_half: int

    def __post_init__(self):
        if not (np.isfinite(self.r) and self.r > 0):
            raise DomainError(f"r must be positive, got {self.r}")
        if not (np.isfinite(self.eps) and self.eps > 0):
            raise DomainError(f"eps must be positive, got {self.eps}")
        if int(self.n_half) != self.n_half or self.n_half < 0:
            raise DomainError(f"n_half must be a non-negative integer, got {self.n_half}")
        object.__setattr__(self, "n_half", int(self.n_half))
        if self.alpha >= HALF_PI:
            raise DomainError(f"half-angle alpha = eps*N/r = {self.alpha:.6g} must be below pi/2")

    @property
    def kappa(self) -> float:
        return 1.0 / self.r

    @property
    def L(self) -> float:
        return self.eps * self.n_half

    @property
    def alpha(self) -> float:
        return self.eps * self.n_half / self.r

    @classmethod
    def from_arc(cls, L: float, kappa: float, n_half: int) -> "SemicircleModel":
        """Model with half arc length ``L`` split into ``n_half`` steps."""
        return cls(r=1.0 / kappa, eps=L / n_half, n_half=n_half)


def _arc_points(r: float, eps: float, idx: np.ndarray) -> np.ndarray:
    t = eps * idx / r
    return np.column_stack([r * np.sin(t), r - r * np.cos(t)])


def semicircle_points(model: SemicircleModel, noise: NoiseSpec | None = None) -> np.ndarray:
    """The ``2N + 1`` samples, ordered ``i = -N..N``, optionally with Gaussian noise."""
    idx = np.arange(-model.n_half, model.n_half + 1, dtype=np.float64)
    pts = _arc_points(model.r, model.eps, idx)
    if noise is not None and noise.sigma_n > 0:
        pts = pts + make_rng(noise.seed).normal(0.0, noise.sigma_n, size=pts.shape)
    return pts


def covariance_2d(points) -> np.ndarray:
    """Uniform-weight centered covariance ``(1/n) sum (p - mean)(p - mean)^T``."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 2:
        raise ValueError(f"need at least two 2D points, got shape {pts.shape}")
    d = pts - pts.mean(axis=0)
    return d.T @ d / pts.shape[0]


def discrete_mean_height(model: SemicircleModel) -> float:
    """Exact mean height of the clean samples.

    ``r (1 - sin((N + 1/2) h) / ((2N + 1) sin(h / 2)))`` with ``h = eps / r``;
    tends to ``r (1 - sin(a) / a)`` as the spacing shrinks at fixed ``a``.
    """
    h = model.eps / model.r
    m = 2 * model.n_half + 1
    return model.r * (1.0 - math.sin(0.5 * m * h) / (m * math.sin(0.5 * h)))


def continuum_mean_height(model: SemicircleModel) -> float:
    a = model.alpha
    if a == 0:
        return 0.0
    return model.r * (1.0 - math.sin(a) / a)


# -- 2x2 eigen machinery ------------------------------------------------------

def _smallest_eig2(a, b, c):
    """Closed-form smallest eigenpair of ``[[a, b], [b, c]]``, broadcasting."""
    a, b, c = np.broadcast_arrays(*(np.asarray(v, dtype=np.float64) for v in (a, b, c)))
    half_diff = 0.5 * (a - c)
    radius = np.hypot(half_diff, b)
    value = 0.5 * (a + c) - radius
    phi = 0.5 * np.arctan2(2.0 * b, a - c)
    normal = np.stack([-np.sin(phi), np.cos(phi)], axis=-1)
    scale = np.maximum(np.abs(a), np.abs(c)) + np.abs(b)
    degenerate = 2.0 * radius <= _DEGENERATE_GAP * scale
    return value, normal, degenerate


def _as_sym2(m) -> np.ndarray:
    m = np.asarray(m, dtype=np.float64)
    if m.shape != (2, 2):
        raise ValueError(f"expected a 2x2 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if abs(m[0, 1] - m[1, 0]) > 1e-12 * max(1.0, np.abs(m).max()):
        raise ValueError("matrix is not symmetric")
    return m


def smallest_eigenvector_sym2(m) -> tuple[float, np.ndarray, bool]:
    m = _as_sym2(m)
    value, normal, degenerate = _smallest_eig2(m[0, 0], m[0, 1], m[1, 1])
    return float(value), normal, bool(degenerate)


# -- normal-error bounds ------------------------------------------------------

def _bound_inputs(clean, noisy) -> tuple[np.ndarray, np.ndarray]:
    clean, noisy = _as_sym2(clean), _as_sym2(noisy)
    if clean[0, 0] <= 0:
        raise DomainError(f"clean m11 must be positive, got {clean[0, 0]}")
    return clean, noisy


def dk_bound(clean, noisy) -> float:
    """``(|m~12| + |m~22 - m22|) / m11``."""
    clean, noisy = _bound_inputs(clean, noisy)
    return (abs(noisy[0, 1]) + abs(noisy[1, 1] - clean[1, 1])) / clean[0, 0]


def prior_bound(clean, noisy) -> float:
    """``(|m~12| + m~22) / m11``, the earlier bound that ignores the clean ``m22``."""
    clean, noisy = _bound_inputs(clean, noisy)
    return (abs(noisy[0, 1]) + noisy[1, 1]) / clean[0, 0]


def dk_bound_eigengap(clean, noisy) -> float:
    """Davis-Kahan with the true separation: ``||noisy - clean||_op / (lam1~ - lam2)``.

    ``lam2`` is the smallest clean eigenvalue and ``lam1~`` the largest noisy
    one. Returns ``inf`` when they are not separated.
    """
    clean, noisy = _as_sym2(clean), _as_sym2(noisy)
    lam2 = np.linalg.eigvalsh(clean)[0]
    lam1_noisy = np.linalg.eigvalsh(noisy)[1]
    gap = lam1_noisy - lam2
    if gap <= 0:
        return math.inf
    return float(np.linalg.norm(noisy - clean, 2) / gap)


def normal_angle_error(clean, noisy) -> float:
    """``|sin theta|`` between the smallest-eigenvalue eigenvectors of two matrices."""
    _, u, deg_u = smallest_eigenvector_sym2(clean)
    _, v, deg_v = smallest_eigenvector_sym2(noisy)
    if deg_u or deg_v:
        logger.warning("normal_angle_error: degenerate spectrum, normal is not unique")
    return float(abs(u[0] * v[1] - u[1] * v[0]))


# -- closed-form projection errors --------------------------------------------

def _check_arc(L, kappa) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    L = np.asarray(L, dtype=np.float64)
    kappa = np.asarray(kappa, dtype=np.float64)
    x = L * kappa
    if np.any(~(L > 0)) or np.any(~(kappa > 0)) or np.any(x >= HALF_PI):
        raise DomainError("need L > 0, kappa > 0 and L * kappa < pi/2")
    return L, kappa, x


def _series(x, coeffs, first_power):
    x2 = x * x
    acc = np.zeros_like(x)
    for c in reversed(coeffs):
        acc = acc * x2 + c
    return acc * x ** first_power


def _scalar_or_array(value):
    return float(value) if np.ndim(value) == 0 else value


def e_one(L, kappa):
    """One-time projection error ``(1/k) (1 - sin(Lk) / (Lk))`` at the arc center."""
    _, kappa, x = _check_arc(L, kappa)
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = 1.0 - np.sin(x) / x
    out = np.where(x < _SERIES_CUTOFF, _series(x, _E_ONE_SERIES, 2), direct) / kappa
    return _scalar_or_array(out)


def e_multi(L, kappa):
    """Multi-projection error ``(1/k) (sin(2Lk) / (4Lk) + 1/2 - sin(Lk)^2 / (Lk)^2)``."""
    _, kappa, x = _check_arc(L, kappa)
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = 0.5 * np.sin(2 * x) / (2 * x) + 0.5 - np.sin(x) ** 2 / x ** 2
    out = np.where(x < _SERIES_CUTOFF, _series(x, _E_MULTI_SERIES, 4), direct) / kappa
    return _scalar_or_array(out)


# -- simulation ---------------------------------------------------------------

def _window_fits(r: float, eps: float, centers: np.ndarray, half: int) -> tuple[np.ndarray, np.ndarray]:
    """Fitted line (unit normal, intercept) from the ``2*half + 1`` samples around each center."""
    lo = int(centers.min()) - half
    hi = int(centers.max()) + half
    raw = _arc_points(r, eps, np.arange(lo, hi + 1, dtype=np.float64))
    # shift by the global mean to keep the prefix sums well conditioned
    shift = raw.mean(axis=0)
    x, y = (raw - shift).T
    moments = np.stack([x, y, x * x, x * y, y * y])
    csum = np.concatenate([np.zeros((5, 1)), np.cumsum(moments, axis=1)], axis=1)
    start = centers.astype(np.intp) - half - lo
    win = (csum[:, start + 2 * half + 1] - csum[:, start]) / (2 * half + 1)
    mx, my, sxx, sxy, syy = win
    _, normals, _ = _smallest_eig2(sxx - mx * mx, sxy - mx * my, syy - my * my)
    means = np.column_stack([mx, my]) + shift
    return normals, np.einsum("ij,ij->i", normals, means)


def _true_tangents(r: float, eps: float, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = eps * centers / r
    normals = np.column_stack([-np.sin(t), np.cos(t)])
    pts = _arc_points(r, eps, centers)
    return normals, np.einsum("ij,ij->i", normals, pts)


def simulate_projection_error(model: SemicircleModel, strategy: Literal["one-time", "multi"] = "one-time",
                              fit_halfwidth: float | None = None,
                              tangent: Literal["fitted", "true"] = "fitted") -> float:
    """Reconstruct ``p_0`` from the clean samples and return ``||p_hat - p_0||``.

    Each tangent line is fitted (uniform weights) to the samples within arc
    half-width ``fit_halfwidth`` (default ``model.L``) of its own point;
    ``tangent="true"`` uses exact circle tangents instead. One-time projects
    ``p_0`` onto its own line; multi averages the projections of ``p_0`` onto
    the lines of all ``2N + 1`` samples.
    """
    half = model.n_half if fit_halfwidth is None else int(round(fit_halfwidth / model.eps))
    if strategy == "one-time":
        centers = np.zeros(1)
    elif strategy == "multi":
        centers = np.arange(-model.n_half, model.n_half + 1, dtype=np.float64)
    else:
        raise ValueError(f"unknown strategy {strategy!r}")
    if tangent == "fitted":
        if half < 1:
            raise DomainError("a line fit needs at least one neighbor on each side")
        normals, intercepts = _window_fits(model.r, model.eps, centers, half)
    elif tangent == "true":
        normals, intercepts = _true_tangents(model.r, model.eps, centers)
    else:
        raise ValueError(f"unknown tangent mode {tangent!r}")
    # p_0 is the origin, so its projection onto {a . t = c} is c * a
    proj = intercepts[:, None] * normals
    return float(np.linalg.norm(proj.mean(axis=0)))


def error_grid(Ls, kappas, simulate: bool = False, eps_arc: float = 1e-3) -> list[dict]:
    """Closed-form (and optionally simulated) errors for every valid ``(L, kappa)`` cell.

    Cells with ``L * kappa >= pi/2`` lie outside the model and are skipped.
    """
    rows = []
    for L in np.atleast_1d(Ls):
        for kappa in np.atleast_1d(kappas):
            L, kappa = float(L), float(kappa)
            if not (L > 0 and kappa > 0 and L * kappa < HALF_PI):
                continue
            row = {"L": L, "kappa": kappa, "e_one_closed": e_one(L, kappa),
                   "e_multi_closed": e_multi(L, kappa), "e_one_sim": None, "e_multi_sim": None}
            if simulate:
                n_half = max(1, int(round(L / eps_arc)))
                model = SemicircleModel.from_arc(L, kappa, n_half)
                row["e_one_sim"] = simulate_projection_error(model, "one-time")
                row["e_multi_sim"] = simulate_projection_error(model, "multi")
            rows.append(row)
    return rows


# -- randomized bound trials --------------------------------------------------

@dataclass(frozen=True)
class BoundTrials:
    """Per-trial results of :func:`bound_trials`, aligned arrays."""

    angle_error: np.ndarray
    dk: np.ndarray
    prior: np.ndarray
    dk_eigengap: np.ndarray
    m22_shift: np.ndarray
    noisy_m22: np.ndarray
    alpha: np.ndarray

    @property
    def dk_violations(self) -> int:
        return int(np.count_nonzero(self.angle_error > self.dk))

    @property
    def eigengap_violations(self) -> int:
        return int(np.count_nonzero(self.angle_error > self.dk_eigengap))

    @property
    def tighter_regime(self) -> np.ndarray:
        return np.abs(self.m22_shift) <= self.noisy_m22


def bound_trials(n_trials: int, seed: int = 0, noise_ratio: float = 0.3,
                 r_range=(0.5, 5.0), n_range=(5, 200), alpha_range=(0.05, 1.5)) -> BoundTrials:
    """Noisy-arc covariance trials for the normal-error bounds.

    Each trial draws ``r``, ``N`` and the half-angle uniformly, builds the
    clean covariance at ``p_0``, then perturbs every sample with Gaussian
    noise of std ``f * sqrt(m22)``, ``f ~ U(0, noise_ratio]``.
    """
    rng = make_rng(seed)
    seeds = rng.integers(0, 2**63, size=n_trials)
    out = {k: np.empty(n_trials) for k in ("angle_error", "dk", "prior", "dk_eigengap",
                                            "m22_shift", "noisy_m22", "alpha")}
    for t in range(n_trials):
        trial_rng = make_rng(int(seeds[t]))
        r = trial_rng.uniform(*r_range)
        n_half = int(trial_rng.integers(n_range[0], n_range[1] + 1))
        alpha = trial_rng.uniform(*alpha_range)
        model = SemicircleModel(r=r, eps=alpha * r / n_half, n_half=n_half)
        clean_pts = semicircle_points(model)
        clean = covariance_2d(clean_pts)
        std = (1.0 - trial_rng.uniform(0.0, 1.0)) * noise_ratio * math.sqrt(clean[1, 1])
        noisy = covariance_2d(clean_pts + trial_rng.normal(0.0, std, size=clean_pts.shape))
        out["angle_error"][t] = normal_angle_error(clean, noisy)
        out["dk"][t] = dk_bound(clean, noisy)
        out["prior"][t] = prior_bound(clean, noisy)
        out["dk_eigengap"][t] = dk_bound_eigengap(clean, noisy)
        out["m22_shift"][t] = noisy[1, 1] - clean[1, 1]
        out["noisy_m22"][t] = noisy[1, 1]
        out["alpha"][t] = model.alpha
    return BoundTrials(**out)
