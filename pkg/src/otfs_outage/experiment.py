"""SNR sweeps, verification campaigns and their on-disk formats."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .bound_verify import (
    beta_sequence,
    is_power_of_two,
    verify_prop1,
    verify_prop2,
)
from .dd_channel import GridParams, sample_realization
from .outage import OutageEstimate, monte_carlo_outage, trial_rng, wilson_interval  # noqa: F401
from .rate_distortion import rate_from_distortion
from .spectral import GramDecomposition, gram_components, gram_matrix

log = logging.getLogger(__name__)

CSV_COLUMNS = ("snr_db", "distortion", "trials", "outages", "p_out_mc",
               "ci_low", "ci_high", "p_out_lower_bound", "seed")
HEAVY_SIZE = 32
MAX_LIGHT_MN = 256
# spawn-key prefix that keeps verification draws apart from sweep draws
VERIFY_STREAM = 0x5EED


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    M: int = 16
    N: int = 16
    P: int = 5
    K: int = 1
    distortion: tuple[float, ...] = (0.05, 0.1)
    l_max: int = 8
    k_max: int = 8
    delta_f: float = 15e3
    carrier_hz: float = 4e9  # provenance only, no effect on any computation
    snr_db: tuple[float, ...] = tuple(float(s) for s in range(0, 21, 2))
    trials: int = 2000
    seed: int = 2024
    output_path: str = "outage.csv"
    heavy: bool = False
    workers: int = 1

    def __post_init__(self):
        if isinstance(self.distortion, (int, float)):
            self.distortion = (float(self.distortion),)
        self.distortion = tuple(float(d) for d in self.distortion)
        self.snr_db = tuple(float(s) for s in self.snr_db)

    @property
    def grid(self) -> GridParams:
        return GridParams(self.M, self.N, delta_f=self.delta_f, K=self.K)

    def validate(self) -> "ExperimentConfig":
        try:
            grid = self.grid
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        if grid.MN > MAX_LIGHT_MN and not self.heavy:
            raise ConfigError(f"M*N={grid.MN} exceeds {MAX_LIGHT_MN}; pass --heavy to allow it")
        if self.P < 1:
            raise ConfigError("P must be at least 1")
        cells = (self.l_max + 1) * (2 * self.k_max + 1)
        if self.l_max < 0 or self.k_max < 0:
            raise ConfigError("l_max and k_max must be non-negative")
        if self.P > cells:
            raise ConfigError(f"P={self.P} exceeds the {cells} distinct delay-Doppler cells "
                              f"(l_max={self.l_max}, k_max={self.k_max})")
        if self.l_max >= grid.MN or self.k_max >= grid.MN:
            raise ConfigError(f"l_max/k_max must be below M*N={grid.MN}")
        if not self.distortion:
            raise ConfigError("at least one distortion value is required")
        for d in self.distortion:
            if not 0.0 <= d <= 0.5:
                raise ConfigError(f"distortion {d} outside [0, 0.5]")
        if not self.snr_db:
            raise ConfigError("at least one SNR point is required")
        if any(b <= a for a, b in zip(self.snr_db, self.snr_db[1:])):
            raise ConfigError("snr_db must be strictly increasing")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        return self

    @classmethod
    def from_mapping(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("config file must hold a flat JSON object")
        return cls.from_mapping(data)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), indent=2)


def parse_snr_range(text: str) -> tuple[float, ...]:
    """``"start:stop:step"`` in dB, stop inclusive; a bare number is a single point."""
    parts = text.split(":")
    try:
        values = [float(p) for p in parts]
    except ValueError:
        raise ConfigError(f"bad SNR range {text!r}") from None
    if len(values) == 1:
        return (values[0],)
    if len(values) != 3 or values[2] <= 0 or values[1] < values[0]:
        raise ConfigError(f"SNR range must be start:stop:step with step > 0, got {text!r}")
    start, stop, step = values
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 10) for i in range(count))


@dataclass(frozen=True)
class SweepRow:
    snr_db: float
    distortion: float
    estimate: OutageEstimate
    seed: int

    def as_record(self) -> tuple:
        e = self.estimate
        return (self.snr_db, self.distortion, e.trials, e.outages, e.p_hat,
                e.ci_low, e.ci_high, e.lower_bound, self.seed)


def run_sweep(cfg: ExperimentConfig, workers: int | None = None) -> list[SweepRow]:
    """One Monte-Carlo estimate per (distortion, SNR) point, grouped by distortion.

    Trial ``t`` at SNR index ``i`` and distortion index ``j`` draws its channel
    from ``SeedSequence(cfg.seed, spawn_key=(i, j, t))``.
    """
    cfg.validate()
    workers = cfg.workers if workers is None else workers
    grid = cfg.grid
    rows = []
    pool = ProcessPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        for j, D in enumerate(cfg.distortion):
            target = rate_from_distortion(D, cfg.K)
            for i, snr in enumerate(cfg.snr_db):
                est = monte_carlo_outage(grid, cfg.P, cfg.l_max, cfg.k_max, 10.0 ** (snr / 10.0), target,
                                         cfg.trials, cfg.seed, stream_key=(i, j), executor=pool)
                log.info("D=%g snr=%g dB: %d/%d outages, bound %.3e", D, snr, est.outages, est.trials,
                         est.lower_bound)
                rows.append(SweepRow(snr, D, est, cfg.seed))
    finally:
        if pool is not None:
            pool.shutdown()
    return rows


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def format_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for row in rows:
        writer.writerow([_fmt(v) for v in row.as_record()])
    return buf.getvalue()


def write_csv(rows: Iterable[SweepRow], path: str | Path) -> None:
    Path(path).write_text(format_csv(rows))


def read_csv(path: str | Path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def bound_table(P: int, K: int, distortion: Sequence[float], snr_db: Sequence[float]) -> list[tuple]:
    from .outage import lower_bound

    out = []
    for D in distortion:
        target = rate_from_distortion(D, K)
        for snr in snr_db:
            out.append((snr, D, P, K, lower_bound(P, 10.0 ** (snr / 10.0), target)))
    return out


@dataclass
class _Tally:
    name: str
    passed: int = 0
    total: int = 0
    worst: float = -math.inf
    equal: int = 0

    def add(self, ok: bool, slack: float | None = None, equal: bool = False) -> None:
        self.total += 1
        self.passed += bool(ok)
        self.equal += bool(equal)
        if slack is not None:
            self.worst = max(self.worst, slack)

    def line(self) -> str:
        text = f"{self.name}: {self.passed}/{self.total}"
        extras = []
        if self.worst > -math.inf:
            extras.append(f"max slack {self.worst:.3e}")
        if self.equal:
            extras.append(f"equality {self.equal}")
        return text + (f" ({', '.join(extras)})" if extras else "")


@dataclass
class VerifyReport:
    text: str
    ok: bool
    violations: list[str] = field(default_factory=list)


def verify_report(cfg: ExperimentConfig, campaigns: int, corrupt: bool = False) -> VerifyReport:
    """Run the proposition and structure checks on ``campaigns`` random channels.

    Realization ``t`` is drawn from ``SeedSequence(cfg.seed, spawn_key=(0x5EED, t))``
    and evaluated at ``cfg.snr_db[t % len(cfg.snr_db)]``.  With ``corrupt`` the
    Gram matrix is deliberately damaged, which the checks must catch.
    """
    cfg.validate()
    if campaigns < 1:
        raise ConfigError("campaign count must be positive")
    grid = cfg.grid
    mn = grid.MN
    names = ("prop1", "prop2", "chain", "gram identity", "xi product", "pairing",
             "omega zero diagonal", "hadamard", "similarity", "beta antisymmetry")
    tallies = {n: _Tally(n) for n in names}
    violations = []
    outside = 0
    for t in range(campaigns):
        key = (VERIFY_STREAM, t)
        ch = sample_realization(cfg.P, cfg.l_max, cfg.k_max, trial_rng(cfg.seed, key))
        gamma = 10.0 ** (cfg.snr_db[t % len(cfg.snr_db)] / 10.0)
        gram = gram_components(grid, ch)
        reference = gram_matrix(grid, ch)
        if corrupt:
            gram = GramDecomposition(gram.H_A, gram.H_B1, gram.H_B2 + ch.energy * np.eye(mn))
        err = np.linalg.norm(gram.total - reference) / np.linalg.norm(reference)
        r1 = verify_prop1(grid, ch, gamma, gram=gram)
        r2 = verify_prop2(grid, ch, gamma, gram=gram)
        checks = {
            "prop1": (r1.holds, r1.slack, abs(r1.slack) <= 1e-9 * max(1.0, abs(r1.rhs))),
            "prop2": (r2.holds, r2.slack, abs(r2.slack) <= 1e-9 * max(1.0, abs(r2.rhs))),
            "chain": (r2.chain_holds, None, False),
            "gram identity": (err < 1e-9, None, False),
            "xi product": (r1.xi_matches, None, False),
            "omega zero diagonal": (r2.zero_diagonal, None, False),
            "hadamard": (r2.hadamard_holds, None, False),
            "similarity": (r2.similarity_error < 1e-8, None, False),
        }
        if r1.pairing_holds is not None:
            checks["pairing"] = (r1.pairing_holds, None, False)
        for name, (ok, slack, equal) in checks.items():
            tallies[name].add(ok, slack, equal)
        if is_power_of_two(mn):
            for i in range(ch.P):
                for ip in range(i + 1, ch.P):
                    a, b = ch.paths[i], ch.paths[ip]
                    k_diff = b.doppler_idx - a.doppler_idx
                    if a.delay_idx != b.delay_idx or k_diff % mn == 0:
                        continue
                    if abs(k_diff) >= grid.N:
                        outside += 1
                    beta = beta_sequence(mn, k_diff, float(np.angle(np.conj(a.gain) * b.gain)))
                    s = beta.half_period
                    idx = np.arange(mn - s)
                    anti = np.max(np.abs(beta.values[idx + s] + beta.values[idx]))
                    tallies["beta antisymmetry"].add(anti <= 1e-12)
        failed = [n for n, (ok, _, _) in checks.items() if not ok]
        if failed:
            violations.append(f"violation in realization {t}: {', '.join(failed)} "
                              f"(replay: seed={cfg.seed}, spawn_key={key}, snr_db={cfg.snr_db[t % len(cfg.snr_db)]:g})")

    ok = not violations
    lines = [f"verify: M={cfg.M} N={cfg.N} P={cfg.P} l_max={cfg.l_max} k_max={cfg.k_max} "
             f"realizations={campaigns} seed={cfg.seed}" + (" [corrupted Gram self-test]" if corrupt else "")]
    lines += [tallies[n].line() for n in names if tallies[n].total]
    if outside:
        lines.append(f"note: {outside} same-delay pairs had |k_diff| >= N (outside the stated "
                     "assumption; antisymmetry still checked)")
    lines += violations
    lines.append("status: " + ("OK" if ok else f"FAILED ({len(violations)} realizations)"))
    return VerifyReport("\n".join(lines), ok, violations)
