import numpy as np
import pytest
import scipy.linalg

from otfs_outage.dd_channel import GridParams, build_dd_matrix, dense_dd_matrix, sample_realization
from otfs_outage.spectral import (
    capacity,
    energy_capacity,
    gram_components,
    log_det_cholesky,
    log_det_psd,
)

from conftest import make_channel


def _random_psd(rng, n, rank=None):
    A = rng.normal(size=(n, rank or n)) + 1j * rng.normal(size=(n, rank or n))
    return A @ A.conj().T


def test_single_path_has_no_cross_terms(grid4):
    ch = make_channel([0.6 + 0.8j], [3], [-2])
    gc = gram_components(grid4, ch)
    assert np.all(gc.H_B1 == 0) and np.all(gc.H_B2 == 0)
    np.testing.assert_allclose(gc.H_A, np.eye(16), atol=1e-15)


def test_shared_delay_goes_to_b1(grid4):
    ch = make_channel([0.5 + 0.1j, -0.2 + 0.7j], [2, 2], [1, -3])
    gc = gram_components(grid4, ch)
    assert np.all(gc.H_B2 == 0)
    assert np.linalg.norm(gc.H_B1) > 0.1


def test_gram_identity_against_dense_oracle(grid4, rng):
    for _ in range(10):
        ch = sample_realization(3, 8, 8, rng)
        H = dense_dd_matrix(grid4, ch)
        G = H.conj().T @ H
        gc = gram_components(grid4, ch)
        assert np.linalg.norm(gc.total - G) / np.linalg.norm(G) < 1e-9
        for part in (gc.H_B1, gc.H_B2):
            np.testing.assert_allclose(part, part.conj().T, atol=1e-12)
        assert np.allclose(gc.H_A, gc.H_A[0, 0] * np.eye(16))


@pytest.mark.parametrize("P", [1, 2, 3, 4, 5, 6])
@pytest.mark.parametrize("size", [2, 4, 8, 16])
def test_gram_identity_sizes(rng, P, size):
    g = GridParams(size, size)
    ch = sample_realization(P, min(8, g.MN - 1), min(8, g.MN - 1), rng)
    gc = gram_components(g, ch)
    G = build_dd_matrix(g, ch).gram()
    assert np.linalg.norm(gc.total - G) / np.linalg.norm(G) < 1e-9


def test_log_det_examples():
    assert log_det_psd(np.eye(2), 1.0) == pytest.approx(2.0, abs=1e-12)
    assert log_det_psd(np.diag([0.0, 2.0]), 1.0) == pytest.approx(np.log2(3), abs=1e-12)


def test_log_det_matches_lu_determinant(rng):
    G = _random_psd(rng, 8)
    gamma = 3.7
    _, logabs = np.linalg.slogdet(np.eye(8) + gamma * G)
    lu, _ = scipy.linalg.lu_factor(np.eye(8) + gamma * G)
    via_lu = np.sum(np.log(np.abs(np.diag(lu)))) / np.log(2)
    assert log_det_psd(G, gamma) == pytest.approx(via_lu, rel=1e-9)
    assert log_det_cholesky(G, gamma) == pytest.approx(via_lu, rel=1e-9)


def test_log_det_clamps_rounding_negatives(rng):
    G = _random_psd(rng, 6, rank=2)
    assert log_det_psd(G, 2.0) >= 0


def test_log_det_rejects_non_hermitian(rng):
    A = rng.normal(size=(4, 4))
    with pytest.raises(ValueError):
        log_det_psd(A, 1.0)
    with pytest.raises(ValueError):
        log_det_psd(np.diag([1.0, -1.0]), 1.0)
    with pytest.raises(ValueError):
        log_det_psd(np.eye(2), -1.0)


def test_capacity_examples(rng, grid4):
    ch = sample_realization(3, 8, 8, rng)
    assert capacity(grid4, ch, 0.0) == 0.0
    assert capacity(GridParams(2, 2), make_channel([1.0], [0], [0]), 1.0) == 1.0
    c = capacity(grid4, ch, 10.0)
    assert 0 <= c <= energy_capacity(ch, 10.0)


def test_capacity_single_path_is_shift_invariant():
    g = GridParams(8, 8)
    for l, k in [(0, 0), (5, 7), (8, -8)]:
        assert capacity(g, make_channel([0.6j], [l], [k]), 5.0) == np.log2(1 + 5.0 * 0.36)


def test_capacity_methods_agree(rng):
    g = GridParams(16, 16)
    for _ in range(5):
        ch = sample_realization(5, 8, 8, rng)
        assert capacity(g, ch, 20.0, "cholesky") == pytest.approx(capacity(g, ch, 20.0, "eig"), rel=1e-9)
    with pytest.raises(ValueError):
        capacity(g, ch, 1.0, method="qr")


def test_capacity_nondecreasing_and_bounded(rng):
    g = GridParams(8, 8)
    gammas = np.logspace(-2, 4, 25)
    for _ in range(20):
        ch = sample_realization(int(rng.integers(1, 7)), 8, 8, rng)
        caps = [capacity(g, ch, gm) for gm in gammas]
        assert np.all(np.diff(caps) >= -1e-12)
        assert all(c <= energy_capacity(ch, gm) + 1e-12 for c, gm in zip(caps, gammas))


def test_eigen_and_cholesky_routes_agree_up_to_256(rng):
    for M in (4, 8, 16):
        g = GridParams(M, M)
        ch = sample_realization(5, 8, 8, rng)
        G = build_dd_matrix(g, ch).gram()
        assert log_det_psd(G, 7.5) == pytest.approx(log_det_cholesky(G, 7.5), rel=1e-9)
