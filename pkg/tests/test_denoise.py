import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import random_rotation
from wmp.denoise import (DenoiseParams, denoise, denoise_one_time, denoise_wmp, multi_project,
                         project_to_plane)
from wmp.graph import build_graph, neighborhood
from wmp.metrics import mse, snr
from wmp.synth import NoiseSpec, ShapeSpec, add_gaussian_noise, sample_shape
from wmp.tangent import PlaneTable, TangentPlane, estimate_planes
from wmp.theory2d import e_one


def _unit(v):
    v = np.asarray(v, dtype=float)
    return v / np.linalg.norm(v)


def _noisy_sphere(seed, sigma_n=0.01, n=2000):
    clean = sample_shape(ShapeSpec("sphere", n, seed=seed))
    return clean, add_gaussian_noise(clean, NoiseSpec(sigma_n, seed=seed + 1000))


# -- parameters ---------------------------------------------------------------

@pytest.mark.parametrize("kwargs", [dict(epsilon=0), dict(epsilon=-1), dict(epsilon=0.1, sigma=0),
                                    dict(epsilon=0.1, iterations=0), dict(epsilon=0.1, iterations=1.5),
                                    dict(epsilon=0.1, strategy="both")])
def test_params_rejected(kwargs):
    with pytest.raises(ValueError):
        DenoiseParams(**kwargs)


def test_params_defaults_and_aliases():
    p = DenoiseParams(0.2, strategy="one")
    assert p.sigma == 0.1 and p.strategy == "one-time" and p.iterations == 1
    assert DenoiseParams(0.2, strategy="WMP").strategy == "multi"


# -- projection onto a plane --------------------------------------------------

def test_project_point_on_plane_is_fixed():
    plane = TangentPlane(_unit([1, 2, 2]), 0.7)
    p = project_to_plane([4, -1, 0], plane)
    np.testing.assert_allclose(project_to_plane(p, plane), p, atol=1e-15)


def test_project_axis_aligned():
    np.testing.assert_array_equal(project_to_plane([1, 2, 3], TangentPlane(np.array([0, 0, 1.0]), 0.0)), [1, 2, 0])


def test_project_random_planes_distance_formula():
    rng = np.random.default_rng(0)
    for _ in range(100):
        a = _unit(rng.normal(size=3))
        plane = TangentPlane(a, rng.normal())
        p = rng.normal(size=3) * 3
        t = project_to_plane(p, plane)
        assert abs(a @ t - plane.intercept) < 1e-12
        assert np.linalg.norm(t - p) == pytest.approx(abs(a @ p - plane.intercept), abs=1e-12)
        assert np.linalg.norm(np.cross(t - p, a)) < 1e-12
        # other points of the plane are farther away
        basis = np.linalg.svd(a[None, :])[2][1:]
        others = t + rng.normal(size=(50, 2)) @ basis
        assert np.all(np.linalg.norm(others - p, axis=1) >= np.linalg.norm(t - p))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_projection_onto_true_plane_never_moves_away(seed):
    rng = np.random.default_rng(seed)
    a = _unit(rng.normal(size=3))
    c = rng.normal()
    p = rng.normal(size=3)
    p = p - (a @ p - c) * a
    noisy = p + rng.normal(size=3) * rng.uniform(1e-3, 1)
    t = project_to_plane(noisy, TangentPlane(a, c))
    assert np.linalg.norm(t - p) <= np.linalg.norm(noisy - p) + 1e-12


# -- multi-projection ---------------------------------------------------------

def _table(normals, intercepts):
    normals = np.asarray(normals, dtype=float)
    n = normals.shape[0]
    return PlaneTable(normals=normals, intercepts=np.asarray(intercepts, dtype=float), means=np.zeros((n, 3)),
                      eigenvalues=np.zeros(n), valid=np.ones(n, dtype=bool), degenerate=np.zeros(n, dtype=bool))


def test_multi_project_isolated_point_is_identity():
    pts = np.array([[0, 0, 0], [5, 0, 0], [0, 5, 0.0]])
    g = build_graph(pts, 1.0)
    table = _table([[0, 0, 1]] * 3, [1.0] * 3)
    np.testing.assert_array_equal(multi_project(pts, table, g, 0), pts[0])


def test_multi_project_coincident_planes():
    rng = np.random.default_rng(1)
    pts = rng.uniform(size=(20, 3))
    g = build_graph(pts, 10.0, 0.5)
    a = _unit([1, -2, 0.5])
    table = _table(np.tile(a, (20, 1)), np.full(20, 0.3))
    for i in range(20):
        expected = project_to_plane(pts[i], TangentPlane(a, 0.3))
        np.testing.assert_allclose(multi_project(pts, table, g, i), expected, atol=1e-14)


def test_multi_project_matches_vectorized_pass():
    rng = np.random.default_rng(2)
    pts = rng.uniform(size=(300, 3)) * [1, 1, 0.1]
    params = DenoiseParams(0.15)
    g = build_graph(pts, params.epsilon, params.sigma)
    planes = estimate_planes(pts, g)
    out = denoise_wmp(pts, params)
    for i in range(0, 300, 7):
        np.testing.assert_allclose(multi_project(pts, planes, g, i), out[i], atol=1e-13)


def test_multi_project_is_local_minimum():
    rng = np.random.default_rng(3)
    pts = rng.normal(size=(12, 3))
    g = build_graph(pts, 100.0, 1.5)
    normals = np.array([_unit(v) for v in rng.normal(size=(12, 3))])
    table = _table(normals, rng.normal(size=12))
    i = 4
    ids, w = neighborhood(g, i)
    targets = np.array([project_to_plane(pts[i], table.plane(j)) for j in ids])

    def objective(q):
        return float(w @ np.sum((q - targets) ** 2, axis=1))

    best = multi_project(pts, table, g, i)
    base = objective(best)
    for _ in range(100):
        step = rng.normal(size=3)
        assert objective(best + 1e-4 * step / np.linalg.norm(step)) > base
    grad = 2 * (w @ (best - targets))
    assert np.linalg.norm(grad) < 1e-12


# -- whole-cloud behavior -----------------------------------------------------

def test_plane_is_fixed_point():
    rng = np.random.default_rng(4)
    uv = rng.uniform(size=(500, 2))
    a = _unit([0.2, -0.3, 1])
    basis = np.linalg.svd(a[None, :])[2][1:]
    pts = uv @ basis + 0.25 * a
    for strategy in ("one-time", "multi"):
        out = denoise(pts, DenoiseParams(0.15, strategy=strategy))
        np.testing.assert_allclose(out, pts, atol=1e-9)


def test_sparse_points_unchanged():
    pts = np.array([[0, 0, 0], [0.01, 0, 0], [3, 3, 3.0], [3, 3.01, 3], [3, 3, 3.02], [3.01, 3.01, 3]])
    out = denoise_wmp(pts, DenoiseParams(0.1))
    np.testing.assert_array_equal(out[:2], pts[:2])


def test_sphere_bias_smaller_than_one_time():
    g = np.random.default_rng(5).standard_normal((2000, 3))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    params = DenoiseParams(0.1)
    multi = np.linalg.norm(denoise_wmp(g, params) - g, axis=1)
    one = np.linalg.norm(denoise_one_time(g, params) - g, axis=1)
    assert multi.mean() / one.mean() < 1
    # bias stays a small fraction of the neighborhood radius
    assert multi.max() < 0.1 * params.epsilon


def test_strip_one_time_displacement_matches_closed_form():
    r, eps = 1.0, 0.4
    theta = np.linspace(-1.2, 1.2, 801)
    t, z = np.meshgrid(theta, [-0.06, 0.0, 0.06], indexing="ij")
    pts = np.column_stack([r * np.sin(t.ravel()), r - r * np.cos(t.ravel()), z.ravel()])
    i = int(np.argmin(np.linalg.norm(pts, axis=1)))
    out = denoise_one_time(pts, DenoiseParams(eps, sigma=1e6))
    disp = out[i] - pts[i]
    # the ball of radius eps cuts an arc of half-length 2 r asin(eps / 2r)
    expected = e_one(2 * r * math.asin(eps / (2 * r)), 1 / r)
    assert disp[1] > 0
    assert np.linalg.norm(disp) == pytest.approx(expected, rel=0.05)


@pytest.mark.parametrize("seed", range(3))
def test_noisy_sphere_improves(seed):
    clean, noisy = _noisy_sphere(seed)
    params = DenoiseParams(0.1)
    for out in (denoise_wmp(noisy, params), denoise_one_time(noisy, params)):
        assert mse(out, clean) < mse(noisy, clean)
        assert snr(out, clean) > snr(noisy, clean)


def test_output_shape_and_input_untouched():
    clean, noisy = _noisy_sphere(9, n=500)
    before = noisy.copy()
    out = denoise_wmp(noisy, DenoiseParams(0.15))
    assert out.shape == noisy.shape
    np.testing.assert_array_equal(noisy, before)


def test_iterations_rebuild_each_round():
    clean, noisy = _noisy_sphere(10, n=1000)
    once = denoise_wmp(noisy, DenoiseParams(0.12))
    twice = denoise_wmp(noisy, DenoiseParams(0.12, iterations=2))
    np.testing.assert_array_equal(twice, denoise_wmp(once, DenoiseParams(0.12)))


# -- equivariance -------------------------------------------------------------

def test_rigid_motion_equivariance():
    rng = np.random.default_rng(11)
    clean, noisy = _noisy_sphere(11, n=1500)
    rot = random_rotation(rng)
    shift = rng.normal(size=3)
    params = DenoiseParams(0.1)
    moved = denoise_wmp(noisy @ rot.T + shift, params)
    np.testing.assert_allclose(moved, denoise_wmp(noisy, params) @ rot.T + shift, atol=1e-9)


def test_scale_covariance():
    clean, noisy = _noisy_sphere(12, n=1500)
    s = 3.5
    scaled = denoise_wmp(s * noisy, DenoiseParams(s * 0.1, sigma=s * 0.04))
    np.testing.assert_allclose(scaled, s * denoise_wmp(noisy, DenoiseParams(0.1, sigma=0.04)), atol=1e-9)


def test_permutation_equivariance():
    clean, noisy = _noisy_sphere(13, n=1500)
    perm = np.random.default_rng(13).permutation(len(noisy))
    params = DenoiseParams(0.1)
    np.testing.assert_allclose(denoise_wmp(noisy[perm], params), denoise_wmp(noisy, params)[perm], atol=1e-12)
