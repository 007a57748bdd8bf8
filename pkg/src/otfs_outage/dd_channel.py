"""Delay-Doppler multipath channels and the effective DD-domain channel matrix.

Index convention used throughout the package: a DD-domain vector of length
``M*N`` is laid out as ``j = n*M + m`` with ``n`` the Doppler (slot) index and
``m`` the delay (subcarrier) index, matching ``kron(F_N, I_M)``.  The cyclic
shift ``Pi`` moves ``e_j`` to ``e_{(j+1) mod MN}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class GridParams:
    """OTFS frame geometry. ``T`` defaults to ``1/delta_f`` (critical sampling)."""

    M: int
    N: int
    delta_f: float = 15e3
    T: float | None = None
    K: int = 1

    def __post_init__(self):
        for name in ("M", "N", "K"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.delta_f <= 0:
            raise ValueError("delta_f must be positive")
        if self.T is None:
            object.__setattr__(self, "T", 1.0 / self.delta_f)
        if not math.isclose(self.T * self.delta_f, 1.0, rel_tol=1e-9):
            raise ValueError(f"T * delta_f must equal 1, got {self.T * self.delta_f!r}")

    @property
    def MN(self) -> int:
        return self.M * self.N

    def delay_seconds(self, l: int) -> float:
        return l / (self.M * self.delta_f)

    def doppler_hz(self, k: int) -> float:
        return k / (self.N * self.T)


@dataclass(frozen=True)
class PathSpec:
    gain: complex
    delay_idx: int
    doppler_idx: int

    def __post_init__(self):
        if int(self.delay_idx) != self.delay_idx or int(self.doppler_idx) != self.doppler_idx:
            raise ValueError("delay and Doppler indices must be integers")
        if self.delay_idx < 0:
            raise ValueError(f"delay index must be non-negative, got {self.delay_idx}")
        object.__setattr__(self, "delay_idx", int(self.delay_idx))
        object.__setattr__(self, "doppler_idx", int(self.doppler_idx))
        object.__setattr__(self, "gain", complex(self.gain))


@dataclass(frozen=True)
class ChannelRealization:
    """P resolvable paths, each occupying a distinct (delay, Doppler) cell."""

    paths: tuple[PathSpec, ...]

    def __post_init__(self):
        paths = tuple(self.paths)
        if not paths:
            raise ValueError("a channel needs at least one path")
        cells = {(p.delay_idx, p.doppler_idx) for p in paths}
        if len(cells) != len(paths):
            raise ValueError("paths must occupy pairwise distinct (delay, Doppler) cells")
        object.__setattr__(self, "paths", paths)

    @classmethod
    def from_arrays(cls, gains, delays, dopplers) -> "ChannelRealization":
        return cls(tuple(PathSpec(h, l, k) for h, l, k in zip(gains, delays, dopplers)))

    @property
    def P(self) -> int:
        return len(self.paths)

    @property
    def gains(self) -> np.ndarray:
        return np.array([p.gain for p in self.paths], dtype=complex)

    @property
    def delays(self) -> np.ndarray:
        return np.array([p.delay_idx for p in self.paths], dtype=int)

    @property
    def dopplers(self) -> np.ndarray:
        return np.array([p.doppler_idx for p in self.paths], dtype=int)

    @property
    def energy(self) -> float:
        """Sum of squared path gains."""
        return float(np.sum(np.abs(self.gains) ** 2))


@dataclass(frozen=True)
class DDMatrix:
    """Effective DD-domain channel matrix, stored sparse (at most P nonzeros per row)."""

    entries: sp.csr_array
    realization: ChannelRealization

    @property
    def shape(self) -> tuple[int, int]:
        return self.entries.shape

    def toarray(self) -> np.ndarray:
        return self.entries.toarray()

    def gram(self) -> np.ndarray:
        """Dense ``H^H H``."""
        H = self.entries
        return (H.conj().T @ H).toarray()


def sample_realization(P: int, l_max: int, k_max: int, rng: np.random.Generator) -> ChannelRealization:
    """Draw P paths with Rayleigh gains and distinct integer (delay, Doppler) cells.

    Gains are zero-mean circular complex Gaussian with variance ``1/(2P)`` per
    real dimension, so the expected total path energy is one.  Cells are drawn
    uniformly without replacement from ``[0, l_max] x [-k_max, k_max]``.
    """
    if P <= 0:
        raise ValueError(f"path count must be positive, got {P}")
    if l_max < 0 or k_max < 0:
        raise ValueError("l_max and k_max must be non-negative")
    n_doppler = 2 * k_max + 1
    n_cells = (l_max + 1) * n_doppler
    if P > n_cells:
        raise ValueError(f"cannot place {P} distinct paths on a grid of {n_cells} delay-Doppler cells")
    cells = rng.choice(n_cells, size=P, replace=False)
    delays = cells // n_doppler
    dopplers = cells % n_doppler - k_max
    return ChannelRealization.from_arrays(sample_gains(P, rng), delays, dopplers)


def sample_gains(P: int, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
    """Rayleigh path gains, shape ``(P,)`` or ``(size, P)``; per-dimension variance ``1/(2P)``."""
    shape = (P,) if size is None else (size, P)
    re_im = rng.normal(0.0, math.sqrt(1.0 / (2 * P)), size=(*shape, 2))
    return re_im[..., 0] + 1j * re_im[..., 1]


def permutation_power(mn: int, l: int) -> np.ndarray:
    """Dense ``Pi^l`` with ``Pi e_j = e_{(j+1) mod mn}``; ``l = mn`` gives the identity."""
    if mn < 1:
        raise ValueError("dimension must be positive")
    if not 0 <= l <= mn:
        raise ValueError(f"shift {l} outside [0, {mn}]")
    out = np.zeros((mn, mn))
    cols = np.arange(mn)
    out[(cols + l) % mn, cols] = 1.0
    return out


def doppler_power(mn: int, k: int) -> np.ndarray:
    """Dense ``Delta^k = diag(alpha^(j*k))`` with ``alpha = exp(2j*pi/mn)``."""
    if mn < 1:
        raise ValueError("dimension must be positive")
    if abs(k) > mn:
        raise ValueError(f"Doppler power {k} outside [-{mn}, {mn}]")
    j = np.arange(mn)
    # reduce the exponent first so the phase is exact at multiples of pi/2
    return np.diag(np.exp(2j * np.pi * ((j * k) % mn) / mn))


def dft_matrix(n: int) -> np.ndarray:
    """Unitary DFT matrix, ``F[a, b] = exp(-2j*pi*a*b/n) / sqrt(n)``."""
    idx = np.arange(n)
    return np.exp(-2j * np.pi * (np.outer(idx, idx) % n) / n) / math.sqrt(n)


def _check_indices(grid: GridParams, ch: ChannelRealization) -> None:
    mn = grid.MN
    for p in ch.paths:
        if p.delay_idx >= mn or abs(p.doppler_idx) >= mn:
            raise ValueError(
                f"path (l={p.delay_idx}, k={p.doppler_idx}) does not fit a grid with MN={mn}")


def dense_dd_matrix(grid: GridParams, ch: ChannelRealization) -> np.ndarray:
    """Reference construction: literal Kronecker/permutation/diagonal products.

    O(P * (MN)^3); meant for small grids and as a cross-check.
    """
    _check_indices(grid, ch)
    mn = grid.MN
    U = np.kron(dft_matrix(grid.N), np.eye(grid.M))
    H = np.zeros((mn, mn), dtype=complex)
    for p in ch.paths:
        H += p.gain * (U @ permutation_power(mn, p.delay_idx) @ doppler_power(mn, p.doppler_idx) @ U.conj().T)
    return H


def path_operator_entries(grid: GridParams, l: int, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Rows, columns and values of ``(F_N x I_M) Pi^l Delta^k (F_N^H x I_M)``.

    The product is a phase-scaled permutation: column ``(n', m')`` maps to row
    ``(n' + k mod N, m' + l mod M)`` with phase
    ``exp(-2j*pi*n*c/N) * alpha^(m'*k)``, where ``c = (m' + l) // M`` is the
    carry of the delay shift into the slot index.
    """
    M, N = grid.M, grid.N
    mn = M * N
    cols = np.arange(mn)
    n_in, m_in = np.divmod(cols, M)
    shifted = m_in + l
    carry, m_out = np.divmod(shifted, M)
    n_out = (n_in + k) % N
    rows = n_out * M + m_out
    phase = ((m_in * k) % mn) / mn - ((n_out * carry) % N) / N
    return rows, cols, np.exp(2j * np.pi * phase)


def build_dd_matrix(grid: GridParams, ch: ChannelRealization) -> DDMatrix:
    """Effective DD channel matrix by direct placement of the P*MN nonzeros."""
    _check_indices(grid, ch)
    mn = grid.MN
    rows, cols, vals = [], [], []
    for p in ch.paths:
        r, c, v = path_operator_entries(grid, p.delay_idx, p.doppler_idx)
        rows.append(r)
        cols.append(c)
        vals.append(p.gain * v)
    # coo -> csr sums paths that alias onto the same cell
    H = sp.coo_array((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                     shape=(mn, mn)).tocsr()
    return DDMatrix(H, ch)


def apply_channel(H: DDMatrix, x: Sequence[complex], noise: Sequence[complex]) -> np.ndarray:
    """Received DD-domain vector ``y = H x + w``."""
    x = np.asarray(x, dtype=complex)
    w = np.asarray(noise, dtype=complex)
    mn = H.shape[0]
    if x.shape != (mn,) or w.shape != (mn,):
        raise ValueError(f"expected length-{mn} vectors, got {x.shape} and {w.shape}")
    return H.entries @ x + w
