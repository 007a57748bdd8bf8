"""Instantaneous capacity and the three-part split of the channel Gram matrix."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .dd_channel import ChannelRealization, GridParams, build_dd_matrix, path_operator_entries

HERMITIAN_RTOL = 1e-8
EIG_CLAMP_RTOL = 1e-10


@dataclass(frozen=True)
class GramDecomposition:
    """``H^H H = H_A + H_B1 + H_B2``.

    ``H_A`` is the path-energy multiple of the identity, ``H_B1`` collects cross
    terms between paths sharing a delay, ``H_B2`` the rest.
    """

    H_A: np.ndarray
    H_B1: np.ndarray
    H_B2: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.H_A + self.H_B1 + self.H_B2


def _path_operator(grid: GridParams, l: int, k: int) -> sp.csr_array:
    r, c, v = path_operator_entries(grid, l, k)
    return sp.csr_array((v, (r, c)), shape=(grid.MN, grid.MN))


def gram_components(grid: GridParams, ch: ChannelRealization) -> GramDecomposition:
    mn = grid.MN
    ops = [_path_operator(grid, p.delay_idx, p.doppler_idx) for p in ch.paths]
    h = ch.gains
    H_A = ch.energy * np.eye(mn, dtype=complex)
    H_B1 = np.zeros((mn, mn), dtype=complex)
    H_B2 = np.zeros((mn, mn), dtype=complex)
    for i in range(ch.P):
        for ip in range(i + 1, ch.P):
            term = (np.conj(h[i]) * h[ip] * (ops[i].conj().T @ ops[ip])).toarray()
            target = H_B1 if ch.paths[i].delay_idx == ch.paths[ip].delay_idx else H_B2
            target += term + term.conj().T
    return GramDecomposition(H_A, H_B1, H_B2)


def gram_matrix(grid: GridParams, ch: ChannelRealization) -> np.ndarray:
    return build_dd_matrix(grid, ch).gram()


def _check_hermitian(G: np.ndarray) -> None:
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {G.shape}")
    scale = np.linalg.norm(G)
    if np.linalg.norm(G - G.conj().T) > HERMITIAN_RTOL * scale:
        raise ValueError("matrix is not Hermitian within tolerance")


def psd_eigenvalues(G: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian PSD matrix, rounding negatives clamped to zero."""
    G = np.asarray(G)
    _check_hermitian(G)
    lam = np.linalg.eigvalsh(G)
    tol = EIG_CLAMP_RTOL * np.linalg.norm(G, 2) if G.size else 0.0
    if lam.size and lam.min() < -tol:
        raise ValueError(f"matrix is not positive semidefinite (eigenvalue {lam.min():.3e})")
    return np.clip(lam, 0.0, None)


def log_det_from_eigenvalues(lam: np.ndarray, gamma: float) -> float:
    """``log2 det(I + gamma*G)`` given the eigenvalues of G."""
    if gamma < 0:
        raise ValueError("SNR must be non-negative")
    return float(np.sum(np.log1p(gamma * np.asarray(lam))) / np.log(2))


def log_det_psd(G: np.ndarray, gamma: float) -> float:
    """``log2 det(I + gamma*G)`` in bits via the Hermitian eigendecomposition."""
    if gamma < 0:
        raise ValueError("SNR must be non-negative")
    return log_det_from_eigenvalues(psd_eigenvalues(G), gamma)


def log_det_cholesky(G: np.ndarray, gamma: float, *, check: bool = True, overwrite: bool = False) -> float:
    """``log2 det(I + gamma*G)`` through a Cholesky factor (about 4x cheaper than eigh).

    ``check=False`` skips the Hermitian test for matrices built as ``H^H H``;
    ``overwrite=True`` lets the routine reuse G's storage.
    """
    if gamma < 0:
        raise ValueError("SNR must be non-negative")
    G = np.asarray(G)
    if check:
        _check_hermitian(G)
    A = G if overwrite else G.copy()
    A *= gamma
    A[np.diag_indices_from(A)] += 1.0
    L = scipy.linalg.cholesky(A, lower=True, overwrite_a=True, check_finite=False)
    return float(2.0 * np.sum(np.log(np.diag(L).real)) / np.log(2))


def capacity(grid: GridParams, ch: ChannelRealization, gamma: float, method: str = "eig") -> float:
    """Normalized capacity ``(1/MN) log2 det(I + gamma H^H H)`` in bits per DD symbol.

    ``method`` is ``"eig"`` (default) or ``"cholesky"``.  A single-path channel
    is handled in closed form since its Gram matrix is ``|h|^2 I``.
    """
    if gamma < 0:
        raise ValueError("SNR must be non-negative")
    if gamma == 0:
        return 0.0
    if ch.P == 1:
        return float(np.log2(1.0 + gamma * ch.energy))
    G = gram_matrix(grid, ch)
    if method == "eig":
        bits = log_det_psd(G, gamma)
    elif method == "cholesky":
        bits = log_det_cholesky(G, gamma, check=False, overwrite=True)
    else:
        raise ValueError(f"unknown method {method!r}")
    return max(bits, 0.0) / grid.MN


def energy_capacity(ch: ChannelRealization, gamma: float) -> float:
    """Capacity when all path energy combines without loss, ``log2(1 + gamma*sum|h|^2)``."""
    return float(np.log2(1.0 + gamma * ch.energy))
