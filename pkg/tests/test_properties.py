import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from fdclutter.covariance import (ClutterRegion, gramian_analytic, off_block_mask,
                                  partition_blocks, permute_block_diagonal)
from fdclutter.fdcm import (WaveformConfig, adapt_fda, adapt_fdmimo, adapt_sf, adapt_stap,
                            assign_linear, assign_matrix, stretched_sum, wavelength)
from fdclutter.metrics import fdl, mean_projected_power
from fdclutter.rank import clutter_rank_bounds, numerical_rank
from fdclutter.steering import (direction_factor, range_factor, steering_vector,
                                velocity_factor)

SETTINGS = settings(max_examples=25, deadline=None,
                    suppress_health_check=[HealthCheck.too_slow])
EPS = np.finfo(float).eps


@st.composite
def configs(draw, max_dim=6):
    P, L, R = (draw(st.integers(1, max_dim)) for _ in range(3))
    Q = draw(st.integers(1, 2))
    M = draw(st.integers(1, 5))
    mode = draw(st.sampled_from(["fixed", "linear", "random"]))
    seed = draw(st.integers(0, 10_000))
    d_r = wavelength() / 2
    return WaveformConfig(P=P, Q=Q, L=L, R=R, G=assign_matrix(P, L, M, mode, seed),
                          d_r=d_r, d_t=R * d_r)


extents = st.floats(0.0, 1.0, allow_nan=False)


@SETTINGS
@given(st.lists(st.integers(0, 9), min_size=1, max_size=4),
       st.lists(st.integers(0, 9), min_size=1, max_size=4),
       st.lists(st.integers(0, 9), min_size=1, max_size=4))
def test_stretched_sum_associative(a, b, c):
    left = stretched_sum(stretched_sum(a, b), c)
    right = stretched_sum(a, stretched_sum(b, c))
    assert sorted(left.ravel()) == sorted(right.ravel())


@SETTINGS
@given(configs())
def test_afdcm_rows_offset_by_q(cfg):
    GQ = cfg.afdcm.G_Q
    for p in range(cfg.P):
        for q in range(cfg.Q):
            assert np.all(GQ[p * cfg.Q + q] - GQ[p * cfg.Q] == q)


@SETTINGS
@given(st.integers(1, 8), st.integers(1, 2), st.integers(1, 4), st.integers(0, 99))
def test_adapter_dimensions(n, Q, R, seed):
    g = np.random.default_rng(seed).integers(0, 4, n)
    for cfg in (adapt_fda(n, Q, g), adapt_sf(n, Q, g), adapt_fdmimo(n, R, Q, g),
                adapt_stap(n, R, 3, g, Q=Q)):
        assert cfg.dim == cfg.P * cfg.Q * cfg.L * cfg.R


@SETTINGS
@given(st.integers(1, 8), st.integers(1, 6))
def test_assign_linear_balanced(M, reps):
    assert np.bincount(assign_linear(M * reps, M)).tolist() == [reps] * M


@SETTINGS
@given(configs(), st.floats(0, 15), st.floats(-40, 40), st.floats(-1, 1))
def test_steering_factorization_and_modulus(cfg, D, v, a):
    u = steering_vector(cfg, D, v, a)
    prod = cfg.modulation() * range_factor(cfg, D) * velocity_factor(cfg, v) * \
        direction_factor(cfg, a)
    assert np.max(np.abs(u - prod)) <= 8 * EPS * np.max(np.abs(prod))
    assert np.allclose(np.abs(u), 1.0)


@SETTINGS
@given(configs(max_dim=4), extents, extents)
def test_block_structure_and_psd(cfg, ve, ae):
    region = ClutterRegion.for_config(cfg, ve, ae)
    G = gramian_analytic(cfg, region)
    blocks = partition_blocks(cfg)
    Gp, _ = permute_block_diagonal(G, blocks)
    assert np.all(Gp.matrix[off_block_mask(blocks)] == 0)
    ev = np.linalg.eigvalsh(G.matrix)
    assert ev.min() >= -1e-10 * ev.max()
    assert numerical_rank(G) == numerical_rank(Gp)


@SETTINGS
@given(configs(max_dim=4), extents, extents)
def test_rank_report_consistency(cfg, ve, ae):
    rep = clutter_rank_bounds(cfg, ClutterRegion.for_config(cfg, ve, ae))
    assert 1 <= rep.numerical_rank <= cfg.dim
    assert rep.lower_bound <= rep.upper_bound <= cfg.dim
    assert 0.0 < rep.ncr <= 1.0
    for b in rep.per_block:
        assert 1 <= b.rank <= b.K and b.U_C_lower <= b.U_C_upper <= b.K


@SETTINGS
@given(st.floats(0, 0.99), st.floats(0, 0.99), st.floats(0, 0.99))
def test_fdl_properties(x, y, z):
    assert fdl(x, x) == 0.0
    lo, hi = sorted((x, y))
    assert fdl(hi, z) <= fdl(lo, z) + 1e-12
    assert math.isfinite(fdl(x, z))


@SETTINGS
@given(st.integers(2, 10), extents, st.integers(0, 99))
def test_mean_projected_power_is_a_fraction(L, ae, seed):
    cfg = adapt_fda(L, 1, np.random.default_rng(seed).integers(0, 3, L))
    G = gramian_analytic(cfg, ClutterRegion.for_config(cfg, None, ae))
    assert 0.0 <= mean_projected_power(G, cfg, 16, seed=seed) <= 1.0
