"""Sequential-scan and index-based linear-detrending subsequence matching."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .detrend import LdSequence, _fit_slice, detrend
from .exceptions import ConfigError, DataError
from .features import mindist_many, paa
from .index import LdIndex, range_query
from .timeseries import TimeSeries

__all__ = [
    "MatchStats",
    "MatchResult",
    "ld_distance",
    "ld_distances",
    "ld_seq_scan",
    "query_window_count",
    "candidate_offset",
    "query_features",
    "indexed_match",
]

# Range-query radii are widened by this much per unit of data magnitude so
# that rounding in the stored boxes can never drop a true match.
_RADIUS_SLACK = 1e-8


@njit(cache=True)
def _ld_distances(x, qbar, starts):
    length = qbar.shape[0]
    out = np.empty(starts.shape[0])
    for r in range(starts.shape[0]):
        start = starts[r]
        alpha, beta = _fit_slice(x, start, length)
        acc = 0.0
        for k in range(length):
            diff = qbar[k] - (x[start + k] - (alpha * (k + 1) + beta))
            acc += diff * diff
        out[r] = math.sqrt(acc)
    return out


def _qbar_values(qbar) -> np.ndarray:
    values = qbar.values if isinstance(qbar, LdSequence) else qbar
    return np.ascontiguousarray(values, dtype=np.float64)


def ld_distances(s: TimeSeries, offsets, qbar) -> np.ndarray:
    """Exact LD-distance between ``qbar`` and ``S[i:i+len-1]`` for each offset ``i``.

    Every distance, whether from the scan or from post-processing, goes
    through this one routine, so the two paths agree bit for bit.
    """
    q = _qbar_values(qbar)
    starts = np.asarray(offsets, dtype=np.int64).reshape(-1) - 1
    if starts.size and (starts.min() < 0 or starts.max() + q.shape[0] > s.n):
        raise IndexError(f"offsets must lie in [1, {s.n - q.shape[0] + 1}] for a length-{q.shape[0]} query")
    return _ld_distances(s.values, q, starts)


def ld_distance(s: TimeSeries, i: int, qbar) -> float:
    """``D(Q-bar, S-bar[i:i+len-1])``."""
    return float(ld_distances(s, [i], qbar)[0])


@dataclass
class MatchStats:
    candidates: int = 0
    post_processed: int = 0
    build_s: float = 0.0
    query_s: float = 0.0
    post_s: float = 0.0

    @property
    def total_s(self) -> float:
        return self.query_s + self.post_s


@dataclass
class MatchResult:
    """Matching offsets ``i`` (each match is ``S[i : i+len(Q)-1]``) with exact distances."""

    offsets: np.ndarray
    distances: np.ndarray
    epsilon: float
    query_length: int
    stats: MatchStats = field(default_factory=MatchStats)

    def __len__(self) -> int:
        return self.offsets.shape[0]


def _check_scan_args(s: TimeSeries, q: TimeSeries, epsilon: float) -> None:
    if q.n > s.n:
        raise ConfigError(f"query length {q.n} exceeds series length {s.n}")
    if not epsilon >= 0:
        raise ConfigError(f"epsilon must be non-negative, got {epsilon}")


def ld_seq_scan(s: TimeSeries, q: TimeSeries, epsilon: float) -> MatchResult:
    """Check every subsequence of length ``len(Q)``; the ground truth."""
    _check_scan_args(s, q, epsilon)
    t0 = time.perf_counter()
    qbar = detrend(q.values)
    dist = ld_distances(s, np.arange(1, s.n - q.n + 2), qbar)
    hit = np.flatnonzero(dist <= epsilon)
    elapsed = time.perf_counter() - t0
    stats = MatchStats(candidates=dist.shape[0], post_processed=dist.shape[0], query_s=elapsed)
    return MatchResult(hit + 1, dist[hit], float(epsilon), q.n, stats)


def query_window_count(len_q: int, omega: int) -> int:
    """Number of disjoint size-``omega`` windows in a query of length ``len_q``."""
    if len_q < omega:
        raise ConfigError(f"query length {len_q} is shorter than the window size {omega}")
    return len_q // omega


def candidate_offset(m: int, a: int, omega: int, len_q: int, n: int) -> int | None:
    """Start of the subsequence whose ``m``-th disjoint window is data window ``a``.

    Returns ``None`` when that subsequence would run off either end of the data.
    """
    i = a - (m - 1) * omega
    if 1 <= i <= n - len_q + 1:
        return i
    return None


def query_features(qbar: np.ndarray, omega: int, f: int) -> np.ndarray:
    """Feature points of the ``p`` disjoint windows of a detrended query, shape ``(p, f)``."""
    p = query_window_count(qbar.shape[0], omega)
    return np.vstack([paa(qbar[k * omega : (k + 1) * omega], f) for k in range(p)])


def _check_admission(idx: LdIndex, s: TimeSeries, q: TimeSeries) -> None:
    meta = idx.meta
    if meta.n != s.n or meta.name != s.name:
        raise DataError(
            f"index was built for series {meta.name!r} (n={meta.n}), "
            f"not {s.name!r} (n={s.n})"
        )
    if not (meta.l_min <= q.n <= meta.l_max):
        raise ConfigError(
            f"query length {q.n} is outside the index's admissible range "
            f"[{meta.l_min}, {meta.l_max}]"
        )


def _radius_slack(s: TimeSeries, qbar: np.ndarray, omega: int) -> float:
    scale = max(float(np.abs(s.values).max()), float(np.abs(qbar).max()))
    return _RADIUS_SLACK * (1.0 + scale) * math.sqrt(omega)


def indexed_match(idx: LdIndex, s: TimeSeries, q: TimeSeries, epsilon: float) -> MatchResult:
    """Index-based matching; returns exactly what :func:`ld_seq_scan` returns.

    Each disjoint query window issues a range query of radius ``eps/sqrt(p)``.
    Hits are mapped back to subsequence starts, then filtered by the summed
    box distance of all ``p`` aligned windows (a lower bound of the squared
    LD-distance) before the exact distance is computed.
    """
    _check_admission(idx, s, q)
    _check_scan_args(s, q, epsilon)
    omega, f = idx.meta.omega, idx.meta.f
    n, len_q = s.n, q.n

    t0 = time.perf_counter()
    qbar = detrend(q.values)
    points = query_features(qbar.values, omega, f)
    p = points.shape[0]
    slack = _radius_slack(s, qbar.values, omega)
    radius = epsilon / math.sqrt(p) + slack

    last_start = n - len_q + 1
    found = []
    for k in range(p):
        starts = range_query(idx, points[k], radius) - k * omega
        found.append(starts[(starts >= 1) & (starts <= last_start)])
    candidates = np.unique(np.concatenate(found))

    # summed lower bound over all aligned windows; rows are offsets - 1
    bound = np.zeros(candidates.shape[0])
    for k in range(p):
        rows = candidates - 1 + k * omega
        bound += mindist_many(points[k], idx.lo[rows], idx.hi[rows]) ** 2
    survivors = candidates[np.sqrt(bound) <= epsilon + slack * math.sqrt(p)]
    t1 = time.perf_counter()

    dist = ld_distances(s, survivors, qbar)
    keep = dist <= epsilon
    t2 = time.perf_counter()

    stats = MatchStats(
        candidates=int(candidates.shape[0]),
        post_processed=int(survivors.shape[0]),
        query_s=t1 - t0,
        post_s=t2 - t1,
    )
    return MatchResult(survivors[keep], dist[keep], float(epsilon), len_q, stats)
