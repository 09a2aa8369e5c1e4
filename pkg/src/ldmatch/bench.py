"""Scan-versus-index benchmarks at a chosen selectivity.

Data come from a seeded Gaussian random walk (numpy's PCG64 generator) or a
series file. Queries are copies of random data subsequences, and the
tolerance for each query is calibrated so that a fixed fraction of all
subsequences match it.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import ConfigError, EquivalenceError
from .index import LdIndex, build_index
from .ldmbr import BuildConfig
from .matching import indexed_match, ld_distances, ld_seq_scan
from .detrend import detrend
from .timeseries import TimeSeries, load_series

__all__ = [
    "BenchSpec",
    "BenchRow",
    "TrialRecord",
    "CSV_HEADER",
    "generate_random_walk",
    "draw_query_offset",
    "extract_query",
    "calibrate_epsilon",
    "run_benchmark",
    "write_report",
]

log = logging.getLogger(__name__)

CSV_HEADER = (
    "query_len",
    "selectivity",
    "epsilon_mean",
    "scan_ms_mean",
    "index_ms_mean",
    "speedup",
    "candidates_mean",
    "matches_mean",
    "pruning_ratio",
)


def generate_random_walk(n: int, seed: int, sigma: float = 1.0, name: str | None = None) -> TimeSeries:
    """``X[1] = 0`` and ``X[t] = X[t-1] + N(0, sigma^2)``, drawn from PCG64(seed)."""
    if n < 2:
        raise ConfigError(f"random walk length must be >= 2, got {n}")
    if not sigma > 0 or not math.isfinite(sigma):
        raise ConfigError(f"sigma must be positive and finite, got {sigma}")
    steps = np.random.default_rng(seed).normal(0.0, sigma, size=n - 1)
    values = np.concatenate(([0.0], np.cumsum(steps)))
    return TimeSeries(values, name=name or f"randomwalk-{seed}")


def draw_query_offset(n: int, length: int, rng: np.random.Generator) -> int:
    if not 2 <= length <= n:
        raise ConfigError(f"query length {length} must lie in [2, {n}]")
    return int(rng.integers(1, n - length + 2))


def extract_query(s: TimeSeries, length: int, rng: np.random.Generator) -> TimeSeries:
    """Copy of ``S[i : i+length-1]`` for a uniformly random valid ``i``.

    The start offset is recorded in the name as ``<series>@<i>``.
    """
    i = draw_query_offset(s.n, length, rng)
    return TimeSeries(s.subsequence(i, i + length - 1), name=f"{s.name}@{i}")


def calibrate_epsilon(s: TimeSeries, q: TimeSeries, target_selectivity: float) -> float:
    """Tolerance at which the scan returns ``max(1, round(target * N))`` matches.

    ``N`` is the number of length-``len(Q)`` subsequences. The value sits
    midway between the m-th and (m+1)-th smallest exact distances, so the
    match count is exact whenever those two distances differ.
    """
    if not 0 < target_selectivity <= 1:
        raise ConfigError(f"selectivity must lie in (0, 1], got {target_selectivity}")
    if q.n > s.n:
        raise ConfigError(f"query length {q.n} exceeds series length {s.n}")
    dist = np.sort(ld_distances(s, np.arange(1, s.n - q.n + 2), detrend(q.values)))
    total = dist.shape[0]
    m = min(total, max(1, math.floor(target_selectivity * total + 0.5)))
    if m == total or dist[m - 1] == dist[m]:
        return float(dist[m - 1])
    mid = 0.5 * (dist[m - 1] + dist[m])
    # adjacent floats can round the midpoint up onto the next distance
    return float(mid if mid < dist[m] else dist[m - 1])


@dataclass
class BenchSpec:
    """One benchmark run: a data source, an index configuration and a grid of cells."""

    n: int = 4096
    omega: int = 64
    f: int = 8
    l_min: int = 64
    l_max: int = 256
    query_lengths: Sequence[int] = (64, 128, 256)
    selectivities: Sequence[float] = (1e-2, 1e-3)
    trials: int = 20
    seed: int = 0
    sigma: float = 1.0
    data_path: str | None = None
    data_format: str = "plain"
    data_column: int = 0
    data_skip_header: bool = False

    def __post_init__(self):
        self.query_lengths = tuple(int(x) for x in self.query_lengths)
        self.selectivities = tuple(float(x) for x in self.selectivities)
        cfg = self.config
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if not self.query_lengths or not self.selectivities:
            raise ConfigError("at least one query length and one selectivity are required")
        for length in self.query_lengths:
            if not cfg.l_min <= length <= cfg.l_max:
                raise ConfigError(f"query length {length} is outside [{cfg.l_min}, {cfg.l_max}]")
        for sel in self.selectivities:
            if not 0 < sel <= 1:
                raise ConfigError(f"selectivity {sel} is outside (0, 1]")
        if self.data_path is None and self.n < cfg.l_min:
            raise ConfigError(f"n={self.n} is shorter than l_min={cfg.l_min}")

    @property
    def config(self) -> BuildConfig:
        return BuildConfig(self.omega, self.f, self.l_min, self.l_max)

    @classmethod
    def from_mapping(cls, data: dict) -> "BenchSpec":
        known = set(cls.__dataclass_fields__)
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown bench spec keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_toml(cls, path) -> "BenchSpec":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        return cls.from_mapping(data.get("bench", data))

    def load_series(self) -> TimeSeries:
        if self.data_path is None:
            return generate_random_walk(self.n, self.seed, self.sigma)
        return load_series(
            self.data_path, self.data_format, self.data_column, self.data_skip_header
        )


@dataclass
class TrialRecord:
    offset: int
    epsilon: float
    matches: int
    candidates: int
    post_processed: int
    scan_ms: float
    index_ms: float


@dataclass
class BenchRow:
    query_len: int
    selectivity: float
    epsilon_mean: float
    scan_ms_mean: float
    index_ms_mean: float
    speedup: float
    candidates_mean: float
    matches_mean: float
    pruning_ratio: float
    trials: list[TrialRecord] = field(default_factory=list, repr=False)

    def csv_fields(self) -> list[str]:
        return [
            str(self.query_len),
            repr(self.selectivity),
            f"{self.epsilon_mean:.9g}",
            f"{self.scan_ms_mean:.6g}",
            f"{self.index_ms_mean:.6g}",
            f"{self.speedup:.4g}",
            f"{self.candidates_mean:.6g}",
            f"{self.matches_mean:.6g}",
            f"{self.pruning_ratio:.6g}",
        ]


def _warm_up() -> None:
    # compile the numba kernels outside any timed region
    s = generate_random_walk(64, 0)
    cfg = BuildConfig(8, 4, 8, 16)
    idx = build_index(s, cfg)
    q = TimeSeries(s.values[:16])
    ld_seq_scan(s, q, 1.0)
    indexed_match(idx, s, q, 1.0)


def run_benchmark(
    spec: BenchSpec,
    series: TimeSeries | None = None,
    index: LdIndex | None = None,
) -> list[BenchRow]:
    """Time the scan and the index on every (query length, selectivity) cell.

    Every trial also checks that both methods return the same offsets and
    raises :class:`EquivalenceError` with a reproduction bundle otherwise.
    """
    s = spec.load_series() if series is None else series
    if index is None:
        t0 = time.perf_counter()
        index = build_index(s, spec.config)
        log.info("index build: %d records in %.1fs", len(index), time.perf_counter() - t0)
    _warm_up()

    rows = []
    cell = 0
    for length in spec.query_lengths:
        for sel in spec.selectivities:
            rng = np.random.default_rng([spec.seed, cell])
            cell += 1
            trials = []
            for t in range(spec.trials):
                offset = draw_query_offset(s.n, length, rng)
                q = TimeSeries(s.subsequence(offset, offset + length - 1), name=f"{s.name}@{offset}")
                eps = calibrate_epsilon(s, q, sel)

                t0 = time.perf_counter()
                scan = ld_seq_scan(s, q, eps)
                t1 = time.perf_counter()
                fast = indexed_match(index, s, q, eps)
                t2 = time.perf_counter()

                if not np.array_equal(scan.offsets, fast.offsets):
                    missing = np.setdiff1d(scan.offsets, fast.offsets)
                    extra = np.setdiff1d(fast.offsets, scan.offsets)
                    raise EquivalenceError(
                        f"indexed match disagrees with the scan (len={length}, sel={sel}, trial={t})",
                        {
                            "seed": spec.seed,
                            "cell": cell - 1,
                            "trial": t,
                            "query_len": length,
                            "selectivity": sel,
                            "query_offset": offset,
                            "epsilon": eps,
                            "missing": missing.tolist(),
                            "extra": extra.tolist(),
                        },
                    )
                trials.append(
                    TrialRecord(
                        offset=offset,
                        epsilon=eps,
                        matches=len(scan),
                        candidates=fast.stats.candidates,
                        post_processed=fast.stats.post_processed,
                        scan_ms=(t1 - t0) * 1e3,
                        index_ms=(t2 - t1) * 1e3,
                    )
                )
            rows.append(_summarise(length, sel, trials, s.n - length + 1))
            r = rows[-1]
            log.info(
                "len=%d sel=%g: scan %.2fms index %.2fms speedup %.2fx pruning %.3f",
                length, sel, r.scan_ms_mean, r.index_ms_mean, r.speedup, r.pruning_ratio,
            )
    return rows


def _summarise(length: int, sel: float, trials: list[TrialRecord], total: int) -> BenchRow:
    def mean(attr):
        return float(np.mean([getattr(t, attr) for t in trials]))

    scan_ms, index_ms = mean("scan_ms"), mean("index_ms")
    candidates = mean("candidates")
    return BenchRow(
        query_len=length,
        selectivity=sel,
        epsilon_mean=mean("epsilon"),
        scan_ms_mean=scan_ms,
        index_ms_mean=index_ms,
        speedup=scan_ms / index_ms if index_ms > 0 else math.inf,
        candidates_mean=candidates,
        matches_mean=mean("matches"),
        pruning_ratio=candidates / total,
        trials=trials,
    )


def write_report(rows: Sequence[BenchRow], out=None) -> str:
    """Render rows as CSV; also write them to ``out`` (a path or text stream) if given."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow(row.csv_fields())
    text = buf.getvalue()
    if isinstance(out, (str, Path)):
        Path(out).write_text(text, encoding="utf-8", newline="\n")
    elif out is not None:
        out.write(text)
    return text
