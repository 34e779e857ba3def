import math

import numpy as np
import pytest

from oracles import brute_chamfer, naive_sq_error, random_rotation
from wmp.metrics import MetricReport, chamfer, evaluate, mse, reports_from_csv, reports_to_csv, snr
from wmp.pointcloud import EmptyInputError


def test_identical_clouds():
    rng = np.random.default_rng(0)
    p = rng.normal(size=(50, 3))
    assert snr(p, p) == math.inf
    assert mse(p, p) == 0.0
    assert chamfer(p, p) == 0.0


def test_unit_ratio_is_zero_db():
    assert snr([[0, 0, 0]], [[1, 0, 0]]) == 0.0


def test_hand_values():
    assert mse([[0, 0, 2]], [[0, 0, 0]]) == 4.0
    assert chamfer([[0, 0, 0]], [[1, 0, 0]]) == 2.0


def test_mismatched_sizes_rejected():
    with pytest.raises(ValueError, match="aligned"):
        snr(np.zeros((2, 3)), np.zeros((3, 3)))
    with pytest.raises(ValueError):
        mse(np.zeros((2, 3)), np.zeros((3, 3)))


def test_chamfer_empty_rejected():
    with pytest.raises(EmptyInputError):
        chamfer(np.empty((0, 3)), np.zeros((1, 3)))


def test_snr_and_mse_match_loop_oracle():
    rng = np.random.default_rng(1)
    for _ in range(100):
        n = int(rng.integers(1, 40))
        q = rng.normal(size=(n, 3))
        p = q + rng.normal(size=(n, 3)) * rng.uniform(0.01, 1)
        err = naive_sq_error(p, q)
        signal = naive_sq_error(q, np.zeros_like(q))
        assert snr(p, q) == pytest.approx(20 * math.log10(signal / err), rel=1e-10)
        assert mse(p, q) == pytest.approx(err / n, rel=1e-12)


@pytest.mark.parametrize("seed", range(3))
def test_chamfer_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    a = rng.uniform(size=(300, 3))
    b = rng.uniform(size=(300, 3))
    assert abs(chamfer(a, b) - brute_chamfer(a, b)) <= 1e-12
    assert chamfer(a, b) == pytest.approx(chamfer(b, a), abs=1e-15)


def test_chamfer_unequal_sizes():
    rng = np.random.default_rng(4)
    a = rng.uniform(size=(120, 3))
    b = rng.uniform(size=(80, 3))
    assert chamfer(a, b) == pytest.approx(brute_chamfer(a, b), abs=1e-12)
    # a subset of a cloud: only the reverse direction contributes
    sub = a[:40]
    d2 = ((a[:, None] - sub[None]) ** 2).sum(-1).min(axis=1)
    assert chamfer(sub, a) == pytest.approx(d2.mean(), abs=1e-15)


def test_chamfer_ignores_order():
    rng = np.random.default_rng(5)
    a = rng.uniform(size=(100, 3))
    assert chamfer(a, a[rng.permutation(100)]) == 0.0


def test_rigid_invariance():
    rng = np.random.default_rng(6)
    q = rng.normal(size=(200, 3))
    p = q + rng.normal(size=(200, 3)) * 0.05
    rot = random_rotation(rng)
    shift = rng.normal(size=3)
    assert mse(p @ rot.T + shift, q @ rot.T + shift) == pytest.approx(mse(p, q), rel=1e-10)
    assert chamfer(p @ rot.T + shift, q @ rot.T + shift) == pytest.approx(chamfer(p, q), rel=1e-10)
    # the signal term uses raw norms, so only rotations about the origin leave it unchanged
    assert snr(p @ rot.T, q @ rot.T) == pytest.approx(snr(p, q), rel=1e-10)


def test_monotone_degradation_in_expectation():
    rng = np.random.default_rng(7)
    q = rng.uniform(-0.5, 0.5, size=(500, 3))
    sigmas = (0.005, 0.01, 0.02, 0.04)
    snrs = np.zeros((20, len(sigmas)))
    mses = np.zeros_like(snrs)
    for s in range(20):
        unit = np.random.default_rng(100 + s).normal(size=q.shape)
        for k, sigma in enumerate(sigmas):
            snrs[s, k] = snr(q + sigma * unit, q)
            mses[s, k] = mse(q + sigma * unit, q)
    assert np.all(np.diff(snrs.mean(axis=0)) < 0)
    assert np.all(np.diff(mses.mean(axis=0)) > 0)


def test_evaluate_and_csv_round_trip():
    rng = np.random.default_rng(8)
    q = rng.normal(size=(30, 3))
    reports = [evaluate(q + 0.1, q, name="shifted"), evaluate(q, q, name="same")]
    text = reports_to_csv(reports)
    assert text.splitlines()[0] == "name,n_points,snr_db,mse,chamfer"
    assert text.splitlines()[2].startswith("same,30,inf,0.0,0.0")
    assert reports_from_csv(text) == reports


def test_csv_bad_header():
    with pytest.raises(ValueError):
        reports_from_csv("a,b\n1,2\n")


def test_report_row_formatting():
    row = MetricReport("x", 3, -math.inf, 0.25, 1e-20).csv_row()
    assert row == ["x", "3", "-inf", "0.25", "1e-20"]
