import math

import numpy as np
import pytest

from oracles import dense_graph
from wmp.graph import build_graph, default_sigma, neighborhood


def _dense(graph):
    n = graph.n_points
    w = np.zeros((n, n))
    w[graph.rows, graph.indices] = graph.weights
    return w


def test_single_point():
    g = build_graph([[1.0, 2.0, 3.0]], epsilon=0.1)
    ids, w = neighborhood(g, 0)
    assert ids.tolist() == [0] and w.tolist() == [1.0]
    assert g.isolated.tolist() == [0]


def test_two_points_at_sigma():
    sigma = 0.3
    g = build_graph([[0, 0, 0], [sigma, 0, 0]], epsilon=1.0, sigma=sigma)
    ids, w = neighborhood(g, 0)
    assert ids.tolist() == [0, 1]
    # 1 / (1 + e^{-1/2}) evaluated by hand
    np.testing.assert_allclose(w, [0.6224593312018546, 0.3775406687981454], rtol=0, atol=1e-15)
    np.testing.assert_allclose(w[0], 1 / (1 + math.exp(-0.5)), rtol=1e-15)


def test_collinear_middle_point_has_three_neighbors():
    eps = 0.2
    g = build_graph([[0, 0, 0], [eps / 2, 0, 0], [eps, 0, 0]], epsilon=eps)
    assert neighborhood(g, 1)[0].tolist() == [0, 1, 2]


def test_out_of_range_id():
    g = build_graph(np.zeros((4, 3)) + np.arange(4)[:, None], epsilon=0.5)
    with pytest.raises(IndexError):
        neighborhood(g, 4)
    with pytest.raises(IndexError):
        neighborhood(g, -1)


@pytest.mark.parametrize("eps, sigma", [(0.0, 0.1), (-1.0, 0.1), (0.1, 0.0), (0.1, -2.0)])
def test_bad_parameters(eps, sigma):
    with pytest.raises(ValueError):
        build_graph(np.zeros((2, 3)), epsilon=eps, sigma=sigma)


def test_default_sigma():
    g = build_graph(np.zeros((2, 3)), epsilon=0.4)
    assert g.sigma == default_sigma(0.4) == 0.2


def test_random_rows_stochastic_and_symmetric():
    rng = np.random.default_rng(0)
    pts = rng.uniform(size=(100, 3))
    g = build_graph(pts, epsilon=0.3, sigma=0.1)
    sums = np.bincount(g.rows, weights=g.weights, minlength=100)
    assert np.max(np.abs(sums - 1)) < 1e-12
    w = _dense(g)
    assert np.array_equal(w > 0, (w > 0).T)
    assert np.all(np.diag(w) > 0)
    kernel = np.exp(-g.distances ** 2 / (2 * g.sigma ** 2))
    k = np.zeros((100, 100))
    k[g.rows, g.indices] = kernel
    assert np.array_equal(k, k.T)


@pytest.mark.parametrize("seed", range(3))
def test_matches_dense_kernel(seed):
    rng = np.random.default_rng(seed)
    n = 500 if seed == 0 else 150
    pts = rng.uniform(size=(n, 3))
    g = build_graph(pts, epsilon=0.15, sigma=0.07)
    ref, mask = dense_graph(pts, 0.15, 0.07)
    assert np.array_equal(_dense(g) > 0, mask)
    np.testing.assert_allclose(_dense(g), ref, rtol=0, atol=1e-14)


def test_monotone_in_epsilon():
    rng = np.random.default_rng(4)
    pts = rng.uniform(size=(200, 3))
    prev = None
    for eps in (0.05, 0.1, 0.2, 0.3):
        cur = set(zip(build_graph(pts, eps, 0.05).rows.tolist(), build_graph(pts, eps, 0.05).indices.tolist()))
        if prev is not None:
            assert prev <= cur
        prev = cur


def test_weight_ordering_within_row():
    rng = np.random.default_rng(5)
    g = build_graph(rng.uniform(size=(150, 3)), epsilon=0.3, sigma=0.1)
    for i in range(g.n_points):
        lo, hi = g.indptr[i], g.indptr[i + 1]
        d, w = g.distances[lo:hi], g.weights[lo:hi]
        order = np.argsort(d, kind="stable")
        d, w = d[order], w[order]
        strict = np.diff(d) > 0
        assert np.all(np.diff(w)[strict] < 0)
