import math

import numpy as np
import pytest

from fdclutter.covariance import ClutterRegion, gramian_analytic
from fdclutter.fdcm import WaveformConfig, adapt_fda, assign_codes, assign_matrix, wavelength
from fdclutter.metrics import (ClutterSubspace, block_subspace, fdl, mean_projected_power, scnr,
                               scnr_approx, scnr_approx_linear, scnr_exact, scnr_exact_linear)
from fdclutter.rank import numerical_rank

from oracles import scnr_eigen_sum


def _low_rank(n=12, k=5, lo=1e4, hi=1e6, seed=0):
    rng = np.random.default_rng(seed)
    Z = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    Q, _ = np.linalg.qr(Z)
    lam = np.geomspace(lo, hi, k)
    V = Q[:, :k]
    return (V * lam) @ V.conj().T, Q


def test_target_orthogonal_to_clutter():
    R, Q = _low_rank()
    u = Q[:, 7] * 2.0
    for scale in (1.0, 1e3):
        ex = scnr_exact_linear(scale * R, 0.5, u)
        ap = scnr_approx_linear(scale * R, 0.5, u)
        assert math.isclose(ex, 8.0, rel_tol=1e-6) and math.isclose(ap, 8.0, rel_tol=1e-9)


def test_target_inside_clutter():
    R, Q = _low_rank()
    u = Q[:, :5] @ np.arange(1, 6)
    assert scnr_approx_linear(R, 1.0, u) <= 1e-9 * np.vdot(u, u).real
    assert scnr_approx(R, 1.0, Q[:, 0]) < -80


def test_exact_matches_eigen_oracle():
    rng = np.random.default_rng(3)
    cfg = WaveformConfig(P=3, Q=2, L=2, R=2, G=assign_matrix(3, 2, 3, "random", 1),
                         d_r=wavelength() / 2, d_t=wavelength())
    R = gramian_analytic(cfg, ClutterRegion.for_config(cfg, 0.5, 0.5)).matrix
    for _ in range(5):
        u = rng.normal(size=cfg.dim) + 1j * rng.normal(size=cfg.dim)
        got = scnr_exact_linear(R, 0.01, u)
        assert math.isclose(got, scnr_eigen_sum(R, 0.01, u), rel_tol=1e-9)


def test_high_clutter_approximation():
    R, _ = _low_rank()
    rng = np.random.default_rng(1)
    for _ in range(100):
        u = rng.normal(size=12) + 1j * rng.normal(size=12)
        assert abs(scnr_exact(R, 1.0, u) - scnr_approx(R, 1.0, u)) < 0.5


def test_exact_dominates_approx_with_strong_clutter():
    R, _ = _low_rank(lo=10.0, hi=1e3, seed=2)
    rng = np.random.default_rng(2)
    for _ in range(20):
        u = rng.normal(size=12) + 1j * rng.normal(size=12)
        ex, ap = scnr_exact_linear(R, 1.0, u), scnr_approx_linear(R, 1.0, u)
        assert ex >= ap * (1 - 1e-6)


def test_exact_non_increasing_in_clutter_power():
    R, _ = _low_rank(lo=0.1, hi=10.0, seed=4)
    rng = np.random.default_rng(4)
    u = rng.normal(size=12) + 1j * rng.normal(size=12)
    vals = [scnr_exact_linear(s * R, 1.0, u) for s in (1, 10, 100, 1000)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))


def test_rejects_bad_inputs():
    R, _ = _low_rank()
    u = np.ones(12)
    for s2 in (0.0, -1.0):
        with pytest.raises(ValueError):
            scnr_exact(R, s2, u)
        with pytest.raises(ValueError):
            scnr_approx(R, s2, u)
    with pytest.raises(ValueError):
        scnr_exact(np.triu(np.ones((12, 12))), 1.0, u)
    with pytest.raises(ValueError):
        ClutterSubspace()


def test_scnr_result_fields():
    R, Q = _low_rank()
    res = scnr(R, 2.0, Q[:, 9])
    assert res.clutter_rank_used == 5 and res.sigma2 == 2.0
    assert math.isclose(res.exact, res.approx, abs_tol=1e-9)


def test_block_subspace_equals_full():
    cfg = WaveformConfig(P=4, Q=1, L=3, R=2, G=assign_matrix(4, 3, 3, "random", 3),
                         d_r=wavelength() / 2, d_t=wavelength())
    region = ClutterRegion.for_config(cfg, 0.4, 0.6)
    full = ClutterSubspace(gramian_analytic(cfg, region))
    blk = block_subspace(cfg, region)
    assert blk.rank == full.rank
    U = np.random.default_rng(0).normal(size=(cfg.dim, 4)) + 0j
    assert np.allclose(blk.complement_power(U), full.complement_power(U), atol=1e-8)


def test_mean_projected_power_trivial():
    cfg = adapt_fda(8, 1, np.zeros(8, int))
    assert mean_projected_power(np.zeros((8, 8)), cfg, 20) == 1.0
    full = ClutterRegion.for_config(cfg, None, 1.0)
    R = gramian_analytic(cfg, full)
    assert numerical_rank(R) == 8
    assert mean_projected_power(R, cfg, 20) < 1e-9
    with pytest.raises(ValueError):
        mean_projected_power(R, cfg, 0)


def test_mean_projected_power_tracks_ncr():
    cfg = adapt_fda(64, 1, assign_codes(64, 4, "random", seed=0))
    ncr, mpp = [], []
    for ext in (0.02, 0.05, 0.1, 0.15, 0.2, 0.3):
        sub = block_subspace(cfg, ClutterRegion.for_config(cfg, None, ext))
        ncr.append(sub.rank / cfg.dim)
        mpp.append(mean_projected_power(sub, cfg, 200, seed=1))
    assert all(0.0 <= m <= 1.0 for m in mpp)
    assert all(b < a for a, b in zip(mpp, mpp[1:]))
    assert np.corrcoef(mpp, 1 - np.array(ncr))[0, 1] > 0.99


def test_fdl_examples():
    assert fdl(0.3, 0.3) == 0.0
    assert math.isclose(fdl(0.5, 0.0), -3.0103, abs_tol=1e-4)
    assert fdl(1.0, 0.5) == -math.inf
    with pytest.raises(ValueError):
        fdl(0.5, 1.0)
    with pytest.raises(ValueError):
        fdl(1.2, 0.1)
