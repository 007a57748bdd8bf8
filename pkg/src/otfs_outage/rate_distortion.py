"""Binary rate-distortion relations and the SNR threshold they imply."""

from __future__ import annotations

import math
from dataclasses import dataclass

BISECTION_STEPS = 64


def binary_entropy(p: float) -> float:
    """H_b(p) in bits, with 0*log(0) taken as 0."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"probability must lie in [0, 1], got {p!r}")
    if p == 0.0 or p == 1.0:
        return 0.0
    return -p * math.log2(p) - (1.0 - p) * math.log2(1.0 - p)


def inv_binary_entropy(v: float) -> float:
    """The p in [0, 1/2] with H_b(p) = v, found by bisection."""
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"entropy must lie in [0, 1], got {v!r}")
    # H_b is flat at 1/2: anything within ~1e-8 of 0.5 already evaluates to 1.0
    if v == 1.0:
        return 0.5
    if v == 0.0:
        return 0.0
    lo, hi = 0.0, 0.5
    for _ in range(BISECTION_STEPS):
        mid = 0.5 * (lo + hi)
        if binary_entropy(mid) < v:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-17:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class LossyTarget:
    """Distortion ``D`` and the rate ``R = K (1 - H_b(D))`` needed to meet it."""

    D: float
    R: float
    K: int

    def __post_init__(self):
        if not 0.0 <= self.D <= 0.5:
            raise ValueError(f"distortion must lie in [0, 1/2], got {self.D!r}")
        if self.K < 1:
            raise ValueError("K must be a positive integer")
        if not math.isclose(self.R, self.K * (1.0 - binary_entropy(self.D)), rel_tol=0, abs_tol=1e-10):
            raise ValueError("rate is inconsistent with distortion")

    @property
    def compression_rate(self) -> float:
        return self.R / self.K


def rate_from_distortion(D: float, K: int) -> LossyTarget:
    if not 0.0 <= D <= 0.5:
        raise ValueError(f"distortion must lie in [0, 1/2], got {D!r}")
    if int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer, got {K!r}")
    R = K * (1.0 - binary_entropy(D))
    return LossyTarget(D=float(D), R=max(R, 0.0), K=int(K))


def distortion_from_rate(R: float, K: int) -> float:
    """Smallest achievable distortion at rate R; zero once R reaches K."""
    if R < 0:
        raise ValueError("rate must be non-negative")
    return inv_binary_entropy(max(0.0, 1.0 - R / K))


def snr_threshold(target: LossyTarget) -> float:
    """``2^R - 1``: the combined-energy SNR below which the target rate is unreachable."""
    return math.expm1(target.R * math.log(2.0))
