"""Numerical checks of the determinant inequalities behind the outage lower bound.

Everything here works in the "inner" domain, i.e. after removing the unitary
``(F_N x I_M)`` similarity: ``I + gamma*H^H H = U (Xi + Omega) U^H`` where
``Xi`` is diagonal (energy plus same-delay cross terms) and ``Omega`` holds the
different-delay cross terms.  Determinants are compared as natural-log values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dd_channel import ChannelRealization, GridParams
from .spectral import gram_components

SLACK = 1e-9
LOG_SLACK = math.log1p(SLACK)
XI_MATCH_RTOL = 1e-8


class UnsupportedStructureError(ValueError):
    """The grid lacks the power-of-two structure the pairing argument relies on."""


def is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def split_odd_power_of_two(k: int) -> tuple[int, int]:
    """``k = a1 * a2`` with ``a1`` odd (sign kept) and ``a2`` a power of two."""
    if k == 0:
        raise ValueError("zero has no odd/power-of-two split")
    a2 = abs(k) & -abs(k)
    return k // a2, a2


@dataclass(frozen=True)
class BetaSequence:
    values: np.ndarray
    k_diff: int
    theta: float
    magnitude: float
    a1: int
    a2: int

    @property
    def half_period(self) -> int:
        """Shift ``s`` with ``beta[b + s] = -beta[b]``."""
        return len(self.values) // (2 * self.a2)

    @property
    def diagonal(self) -> np.ndarray:
        """Diagonal of ``h_i^* h_i' Delta^k + c.c.``, i.e. ``2|h_ii'| beta``."""
        return 2.0 * self.magnitude * self.values


def _cosines(mn: int, k_diff: int, theta: float) -> np.ndarray:
    b = np.arange(mn)
    return np.cos(2.0 * np.pi * ((b * k_diff) % mn) / mn + theta)


def beta_sequence(mn: int, k_diff: int, theta: float, magnitude: float = 1.0) -> BetaSequence:
    """Cosine sequence ``beta_b = cos(2*pi*b*k_diff/mn + theta)`` and its odd/two split."""
    if not is_power_of_two(mn):
        raise UnsupportedStructureError(f"MN={mn} is not a power of two")
    if k_diff == 0:
        raise ValueError("Doppler difference must be nonzero")
    if abs(k_diff) >= mn:
        raise ValueError(f"|k_diff|={abs(k_diff)} must be below MN={mn}")
    a1, a2 = split_odd_power_of_two(k_diff)
    return BetaSequence(_cosines(mn, k_diff, theta), k_diff, float(theta), float(magnitude), a1, a2)


@dataclass(frozen=True)
class XiDiagonal:
    xi1: float
    xi2: np.ndarray

    @property
    def diagonal(self) -> np.ndarray:
        return self.xi1 + self.xi2

    def log_det(self) -> float:
        return float(np.sum(np.log(self.diagonal)))


def _pairs(ch: ChannelRealization, same_delay: bool):
    paths = ch.paths
    for i in range(ch.P):
        for ip in range(i + 1, ch.P):
            if (paths[i].delay_idx == paths[ip].delay_idx) == same_delay:
                yield i, ip


def xi_of(grid: GridParams, ch: ChannelRealization, gamma: float) -> XiDiagonal:
    """Diagonal form of ``I + gamma*(H_A + H_B1)`` in the inner domain."""
    mn = grid.MN
    h = ch.gains
    xi2 = np.zeros(mn)
    for i, ip in _pairs(ch, same_delay=True):
        cross = np.conj(h[i]) * h[ip]
        k_diff = ch.paths[ip].doppler_idx - ch.paths[i].doppler_idx
        xi2 += 2.0 * gamma * abs(cross) * _cosines(mn, k_diff, float(np.angle(cross)))
    return XiDiagonal(1.0 + gamma * ch.energy, xi2)


def _cross_operator(grid: GridParams, k_i: int, d: int, k_ip: int) -> np.ndarray:
    """Dense ``Delta^-k_i Pi^d Delta^k_ip`` placed entrywise."""
    mn = grid.MN
    j = np.arange(mn)
    row = (j + d) % mn
    out = np.zeros((mn, mn), dtype=complex)
    out[row, j] = np.exp(2j * np.pi * (((k_ip * j - k_i * row) % mn) / mn))
    return out


def omega_of(grid: GridParams, ch: ChannelRealization, gamma: float) -> np.ndarray:
    """Different-delay cross terms ``Omega`` in the inner domain."""
    mn = grid.MN
    h = ch.gains
    omega = np.zeros((mn, mn), dtype=complex)
    for i, ip in _pairs(ch, same_delay=False):
        pi, pip = ch.paths[i], ch.paths[ip]
        lam = _cross_operator(grid, pi.doppler_idx, pip.delay_idx - pi.delay_idx, pip.doppler_idx)
        term = np.conj(h[i]) * h[ip] * lam
        omega += gamma * (term + term.conj().T)
    return omega


def _logdet_hpd(A: np.ndarray) -> float:
    """Natural-log determinant of a Hermitian positive definite matrix."""
    lam = np.linalg.eigvalsh(A)
    if lam.min() <= 0:
        raise np.linalg.LinAlgError(f"matrix is not positive definite (eigenvalue {lam.min():.3e})")
    return float(np.sum(np.log(lam)))


def common_half_period(grid: GridParams, ch: ChannelRealization) -> int | None:
    """Shift that flips every same-delay cosine at once, if one exists.

    The pairing argument needs MN to be a power of two and all same-delay
    Doppler differences to share the same power-of-two factor.
    """
    mn = grid.MN
    if not is_power_of_two(mn):
        return None
    a2s = set()
    for i, ip in _pairs(ch, same_delay=True):
        k = ch.paths[ip].doppler_idx - ch.paths[i].doppler_idx
        if k % mn == 0:
            return None
        a2s.add(split_odd_power_of_two(k)[1])
    if len(a2s) != 1:
        return None
    a2 = a2s.pop()
    if mn % (2 * a2):
        return None
    return mn // (2 * a2)


@dataclass
class Prop1Result:
    lhs: float
    rhs: float
    holds: bool
    xi_log_det: float
    xi_matches: bool
    half_period: int | None = None
    pairing_holds: bool | None = None
    notes: list[str] = field(default_factory=list)

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs


@dataclass
class Prop2Result:
    lhs: float
    rhs: float
    holds: bool
    xi_omega_pd: bool
    hadamard_holds: bool
    similarity_error: float
    chain_holds: bool
    zero_diagonal: bool
    notes: list[str] = field(default_factory=list)

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs


def verify_prop1(grid: GridParams, ch: ChannelRealization, gamma: float,
                 gram=None) -> Prop1Result:
    """Check ``det(I + g(H_A + H_B1)) <= det(I + g H_A)`` (log-dets returned).

    ``lhs`` comes from the dense DD-domain matrices; it is re-derived from the
    product of the ``Xi`` diagonal and, when the grid allows, the half-period
    pairing ``(xi1 + x)(xi1 - x) <= xi1^2`` is checked entry by entry.
    """
    gram = gram if gram is not None else gram_components(grid, ch)
    mn = grid.MN
    eye = np.eye(mn)
    lhs = _logdet_hpd(eye + gamma * (gram.H_A + gram.H_B1))
    xi = xi_of(grid, ch, gamma)
    rhs = mn * math.log(xi.xi1)
    xi_ld = xi.log_det()
    notes = []
    xi_ok = abs(math.expm1(xi_ld - lhs)) <= XI_MATCH_RTOL
    s = common_half_period(grid, ch)
    pairing = None
    if any(True for _ in _pairs(ch, same_delay=True)):
        if s is None:
            notes.append("half-period pairing not applicable; product bound follows from zero-sum xi2")
        else:
            b = np.concatenate([np.arange(g * 2 * s, g * 2 * s + s) for g in range(mn // (2 * s))])
            flipped = np.allclose(xi.xi2[b + s], -xi.xi2[b], rtol=0, atol=1e-12 * max(1.0, xi.xi1))
            products = (xi.xi1 + xi.xi2[b]) * (xi.xi1 + xi.xi2[b + s])
            pairing = bool(flipped and np.all(products <= xi.xi1 ** 2 * (1 + SLACK)))
    return Prop1Result(lhs=lhs, rhs=rhs, holds=lhs <= rhs + LOG_SLACK, xi_log_det=xi_ld,
                       xi_matches=bool(xi_ok), half_period=s, pairing_holds=pairing, notes=notes)


def verify_prop2(grid: GridParams, ch: ChannelRealization, gamma: float,
                 gram=None) -> Prop2Result:
    """Check ``det(I + g*Gram) <= det(I + g(H_A + H_B1))`` and its Hadamard-form proof."""
    gram = gram if gram is not None else gram_components(grid, ch)
    mn = grid.MN
    eye = np.eye(mn)
    full = eye + gamma * gram.total
    lhs = _logdet_hpd(full)
    rhs = _logdet_hpd(eye + gamma * (gram.H_A + gram.H_B1))
    xi = xi_of(grid, ch, gamma)
    omega = omega_of(grid, ch, gamma)
    notes = []
    zero_diag = bool(np.all(np.diag(omega) == 0))
    if not zero_diag:
        notes.append("Omega has a nonzero diagonal (delay difference aliases modulo MN)")
    inner = np.diag(xi.diagonal) + omega
    try:
        inner_ld = _logdet_hpd(inner)
        pd = True
    except np.linalg.LinAlgError:
        inner_ld, pd = math.inf, False
    hadamard = pd and inner_ld <= xi.log_det() + LOG_SLACK
    lam_full = np.linalg.eigvalsh(full)
    lam_inner = np.linalg.eigvalsh(inner)
    sim_err = float(np.max(np.abs(lam_full - lam_inner)) / np.max(np.abs(lam_full)))
    chain = lhs <= mn * math.log(xi.xi1) + LOG_SLACK
    return Prop2Result(lhs=lhs, rhs=rhs, holds=lhs <= rhs + LOG_SLACK, xi_omega_pd=pd,
                       hadamard_holds=bool(hadamard), similarity_error=sim_err,
                       chain_holds=bool(chain), zero_diagonal=zero_diag, notes=notes)
