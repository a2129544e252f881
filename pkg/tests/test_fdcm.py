import numpy as np
import pytest

from fdclutter.fdcm import (WaveformConfig, adapt_fda, adapt_fdmimo, adapt_sf, adapt_stap,
                            assign_codes, assign_linear, assign_matrix, assign_random,
                            build_afdcm, stretched_sum, wavelength)


def test_stretched_sum_examples():
    assert stretched_sum([0, 1], [0, 10]).ravel().tolist() == [0, 10, 1, 11]
    assert stretched_sum([[5]], [[7]]).tolist() == [[12]]
    A = [[0, 2], [1, 0]]
    assert stretched_sum(A, [0, 1]).tolist() == [[0, 2], [1, 3], [1, 0], [2, 1]]


def test_stretched_sum_shape_and_associativity():
    rng = np.random.default_rng(0)
    a, b, c = (rng.integers(0, 9, n) for n in (3, 2, 4))
    left = stretched_sum(stretched_sum(a, b), c)
    right = stretched_sum(a, stretched_sum(b, c))
    assert left.shape == (24, 1)
    assert sorted(left.ravel()) == sorted(right.ravel())


def test_afdcm_examples():
    cfg = WaveformConfig(P=16, Q=1, L=4, R=1, G=np.zeros((16, 4), int))
    af = cfg.afdcm
    assert af.M_Q.tolist() == [0]
    assert np.array_equal(af.G_Q, cfg.G)

    cfg = WaveformConfig(P=2, Q=2, L=2, R=3, G=[[0, 2], [1, 0]])
    af = build_afdcm(cfg)
    assert af.G_Q.tolist() == [[0, 2], [1, 3], [1, 0], [2, 1]]
    assert af.M_Q.tolist() == [0, 1, 2, 3]
    assert af.G_Q_rx.shape == (4, 6)
    assert np.array_equal(af.G_Q_rx, np.kron(af.G_Q, np.ones((1, 3), int)))


def test_afdcm_row_structure():
    G = assign_matrix(5, 3, 6, "random", seed=4)
    cfg = WaveformConfig(P=5, Q=3, L=3, R=1, G=G)
    GQ = cfg.afdcm.G_Q
    for p in range(5):
        for q in range(3):
            assert np.all(GQ[p * 3 + q] - GQ[p * 3] == q)


def test_fig3_code_count():
    G = assign_matrix(16, 4, 4, "random", seed=0)
    cfg = WaveformConfig(P=16, Q=1, L=4, R=8, G=G)
    assert cfg.afdcm.M_Q.size == 4


def test_assign_linear():
    assert assign_linear(6, 3).tolist() == [0, 1, 2, 0, 1, 2]
    assert assign_linear(4, 1).tolist() == [0, 0, 0, 0]
    assert assign_linear(3, 8).tolist() == [0, 1, 2]
    counts = np.bincount(assign_linear(24, 4))
    assert counts.tolist() == [6, 6, 6, 6]


def test_assign_random():
    assert np.all(assign_random(50, 1, seed=3) == 0)
    a = assign_random(10_000, 4, seed=11)
    tol = 4 * np.sqrt(0.25 * 0.75 / 10_000)
    assert np.all(np.abs(np.bincount(a, minlength=4) / a.size - 0.25) < tol)
    assert np.array_equal(assign_random(100, 7, seed=5), assign_random(100, 7, seed=5))


def test_assign_random_without_replacement_uses_each_code():
    a = assign_random(8, 8, seed=1, replace=False)
    assert sorted(a.tolist()) == list(range(8))


def test_assign_codes_rejects_unknown_mode():
    with pytest.raises(ValueError):
        assign_codes(4, 2, "spiral")


def test_adapt_fda():
    cfg = adapt_fda(256, 1, assign_linear(256, 4))
    assert cfg.dim == 256 and cfg.monostatic_fda and cfg.P == 1
    assert adapt_fda(2, 1, [0, 0]).afdcm.M_Q.size == 1
    cfg = adapt_fda(4, 2, [0, 2, 1, 3])
    assert cfg.afdcm.G_Q.tolist() == [[0, 2, 1, 3], [1, 3, 2, 4]]
    assert cfg.afdcm.M_Q.size == 5
    with pytest.raises(ValueError):
        adapt_fda(3, 1, [0, 1])


def test_adapt_sf():
    cfg = adapt_sf(256, 1, assign_random(256, 8, seed=2))
    assert cfg.dim == 256
    assert adapt_sf(2, 1, [0, 0]).afdcm.M_Q.size == 1
    cfg = adapt_sf(3, 2, [0, 2, 4])
    assert cfg.afdcm.M_Q.tolist() == [0, 1, 2, 3, 4, 5]
    assert np.bincount(cfg.afdcm.codes).tolist() == [1] * 6


def test_adapt_fdmimo():
    d_r = wavelength() / 2
    cfg = adapt_fdmimo(64, 8, 1, np.zeros(64, int), d_r=d_r, d_t=8 * d_r)
    pos = np.unique(np.round((d_r * 8 * cfg.layout.l + d_r * cfg.layout.r) / d_r).astype(int))
    assert pos.size == 512
    assert adapt_fdmimo(1, 1, 1, [0]).dim == 1


def test_adapt_stap():
    cfg = adapt_stap(16, 8, 16, np.zeros(16, int))
    assert cfg.dim == 2048
    assert cfg.kind == "stap" and np.isclose(2 * cfg.v_p * cfg.pri, cfg.d_r)
    with pytest.raises(ValueError):
        adapt_stap(2, 2, 2, [0, 0], v_p=-1.0)


@pytest.mark.parametrize("build", [
    lambda: adapt_fda(5, 3, [0, 1, 2, 0, 1]),
    lambda: adapt_sf(4, 2, [0, 3, 1, 2]),
    lambda: adapt_fdmimo(3, 2, 2, [0, 1, 2]),
    lambda: adapt_stap(3, 2, 4, [1, 0, 1]),
])
def test_adapter_dimension(build):
    cfg = build()
    assert cfg.dim == cfg.P * cfg.Q * cfg.L * cfg.R == cfg.afdcm.codes.size


def test_config_validation():
    with pytest.raises(ValueError):
        WaveformConfig(P=2, Q=1, L=2, R=1, G=np.zeros((3, 2), int))
    with pytest.raises(ValueError):
        WaveformConfig(P=1, Q=1, L=2, R=1, G=[[0.5, 1]])
    with pytest.raises(ValueError):
        WaveformConfig(P=1, Q=1, L=2, R=2, G=[[0, 1]], monostatic_fda=True)
    with pytest.raises(ValueError):
        WaveformConfig(P=1, Q=0, L=1, R=1, G=[[0]])


def test_config_dict_round_trip():
    beta = np.exp(1j * np.arange(2 * 3 * 2)).reshape(2, 3, 2)
    cfg = WaveformConfig(P=2, Q=2, L=3, R=2, G=[[0, 1, 2], [2, 0, 1]], d_t=0.03, d_r=0.015,
                         beta=beta)
    back = WaveformConfig.from_dict(cfg.to_dict())
    assert back.to_dict() == cfg.to_dict()
    assert np.array_equal(back.beta, cfg.beta)
