"""Monte-Carlo outage probability and its closed-form chi-square lower bound."""

from __future__ import annotations

import math
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dd_channel import ChannelRealization, GridParams, sample_realization
from .rate_distortion import LossyTarget, snr_threshold
from .spectral import capacity

# Trials per task handed to a worker pool.
CHUNK = 250


@dataclass(frozen=True)
class OutageEstimate:
    trials: int
    outages: int
    p_hat: float
    ci_low: float
    ci_high: float
    lower_bound: float

    @property
    def sigma(self) -> float:
        """Binomial standard error of ``p_hat``."""
        return math.sqrt(self.p_hat * (1.0 - self.p_hat) / self.trials)


def wilson_interval(successes: int, trials: int, z: float = 1.959963984540054) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1 or not 0 <= successes <= trials:
        raise ValueError(f"invalid counts {successes}/{trials}")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    low, high = max(0.0, centre - half), min(1.0, centre + half)
    # keep the interval closed around p against rounding at the edges
    return min(low, p), max(high, p)


def outage_indicator(grid: GridParams, ch: ChannelRealization, gamma: float, target: LossyTarget,
                     method: str = "eig") -> bool:
    """True when the channel cannot carry the target rate (strict ``C < R``)."""
    if target.R <= 0.0:
        return False
    return capacity(grid, ch, gamma, method=method) < target.R


def trial_rng(seed: int, key: Sequence[int]) -> np.random.Generator:
    """Independent generator for one trial, addressed by ``(seed, *key)``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(int(k) for k in key)))


def count_outages(grid: GridParams, P: int, l_max: int, k_max: int, gamma: float, target: LossyTarget,
                  seed: int, stream_key: tuple[int, ...], start: int, stop: int) -> int:
    """Outage count over trials ``start..stop-1``; the unit of parallel work."""
    hits = 0
    for t in range(start, stop):
        ch = sample_realization(P, l_max, k_max, trial_rng(seed, (*stream_key, t)))
        hits += outage_indicator(grid, ch, gamma, target, method="cholesky")
    return hits


def monte_carlo_outage(grid: GridParams, P: int, l_max: int, k_max: int, gamma: float, target: LossyTarget,
                       trials: int, seed: int, *, stream_key: tuple[int, ...] = (),
                       workers: int = 1, executor: Executor | None = None) -> OutageEstimate:
    """Estimate the outage probability from ``trials`` independent channel draws.

    Trial ``t`` uses the substream ``SeedSequence(seed, spawn_key=(*stream_key, t))``,
    so the result does not depend on ``workers`` or on task scheduling.
    """
    if int(trials) != trials or trials < 1:
        raise ValueError(f"trial count must be a positive integer, got {trials!r}")
    if seed < 0:
        raise ValueError("seed must be non-negative")
    if gamma < 0:
        raise ValueError("SNR must be non-negative")
    # validates P against the delay-Doppler grid before any work is scheduled
    sample_realization(P, l_max, k_max, np.random.default_rng(0))
    if l_max >= grid.MN or k_max >= grid.MN:
        raise ValueError(f"delay/Doppler ranges exceed the MN={grid.MN} grid")

    if target.R <= 0.0:
        outages = 0
    elif gamma == 0.0:
        outages = trials
    else:
        args = (grid, P, l_max, k_max, gamma, target, seed, tuple(stream_key))
        bounds = [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]
        if executor is None and workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                outages = sum(pool.map(_count_chunk, [(*args, a, b) for a, b in bounds]))
        elif executor is not None:
            outages = sum(executor.map(_count_chunk, [(*args, a, b) for a, b in bounds]))
        else:
            outages = count_outages(*args, 0, trials)

    low, high = wilson_interval(outages, trials)
    return OutageEstimate(trials=trials, outages=outages, p_hat=outages / trials,
                          ci_low=low, ci_high=high, lower_bound=lower_bound(P, gamma, target))


def _count_chunk(args) -> int:
    return count_outages(*args)


def chi_square_tail_sum(P: int, x: float) -> float:
    """``1 - exp(-x) * sum_{i<P} x^i / i!``.

    This is the CDF at ``2x`` of a chi-square variable with ``2P`` degrees of
    freedom.  For ``x < P`` it is summed from the upper series
    ``exp(-x) * sum_{i>=P} x^i / i!`` so that tiny probabilities keep full
    relative precision; for large ``x`` the Poisson terms are built in log space.
    """
    if int(P) != P or P < 1:
        raise ValueError(f"P must be a positive integer, got {P!r}")
    if x < 0 or math.isnan(x):
        raise ValueError(f"x must be non-negative, got {x!r}")
    if x == 0.0:
        return 0.0
    if math.isinf(x):
        return 1.0
    log_x = math.log(x)
    if x < P:
        # first term x^P/P! e^-x, then ratio x/(i+1)
        term = math.exp(P * log_x - math.lgamma(P + 1) - x)
        total = term
        i = P
        while term > total * 1e-17:
            i += 1
            term *= x / i
            total += term
        return min(total, 1.0)
    head = 0.0
    for i in range(P):
        head += math.exp(i * log_x - math.lgamma(i + 1) - x)
    return min(max(1.0 - head, 0.0), 1.0)


def lower_bound(P: int, gamma: float, target: LossyTarget) -> float:
    """Closed-form lower bound on the outage probability.

    Uses ``Pr{sum|h_i|^2 < g/gamma}`` with ``g = 2^R - 1``; the path-energy sum
    is a scaled chi-square variable with ``2P`` degrees of freedom.  A
    non-positive SNR with a positive threshold is treated as certain outage.
    """
    g = snr_threshold(target)
    if g == 0.0:
        return 0.0
    if gamma <= 0.0:
        return 1.0
    return chi_square_tail_sum(P, P * g / gamma)
