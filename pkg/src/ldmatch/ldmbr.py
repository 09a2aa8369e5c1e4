"""LD-MBR construction: one feature-space box per sliding data window.

A window ``S[a:b]`` lies inside many subsequences ``S[i:j]`` whose length is
an admissible query length. Each of those subsequences detrends the window
with its own line, giving one LD-window and one feature point per ``(i, j)``.
The LD-MBR is the bounding box of all these points.

Because PAA is linear, the point for ``(i, j)`` is
``paa(raw window) - sqrt(m) * g_ij(centre of segment d)`` per dimension,
where ``g_ij`` is the trend line of ``S[i:j]``. Only the extreme trend values
at the ``f`` segment centres are needed, so the build never materialises an
LD-window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .exceptions import ConfigError
from .features import LdMbr
from .timeseries import PrefixSums, TimeSeries

__all__ = [
    "BuildConfig",
    "enumerate_containing_subsequences",
    "build_ld_mbr",
    "build_ld_mbr_arrays",
]


@dataclass(frozen=True)
class BuildConfig:
    """Window size, feature count and the admissible query-length range."""

    omega: int
    f: int
    l_min: int
    l_max: int

    def __post_init__(self):
        for field in ("omega", "f", "l_min", "l_max"):
            value = getattr(self, field)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)):
                raise ConfigError(f"{field} must be an integer, got {value!r}")
            object.__setattr__(self, field, int(value))
        if self.omega < 2:
            raise ConfigError(f"window size must be >= 2, got {self.omega}")
        if self.f < 1 or self.omega % self.f:
            raise ConfigError(f"window size {self.omega} is not divisible by f={self.f}")
        if not (self.omega <= self.l_min <= self.l_max):
            raise ConfigError(
                f"need omega <= l_min <= l_max, got omega={self.omega}, "
                f"l_min={self.l_min}, l_max={self.l_max}"
            )

    @property
    def segment(self) -> int:
        return self.omega // self.f


def _i_range(n: int, a: int, b: int, length: int) -> tuple[int, int]:
    return max(1, b - length + 1), min(a, n - length + 1)


def enumerate_containing_subsequences(n: int, a: int, b: int, cfg: BuildConfig) -> list[tuple[int, int]]:
    """All ``(i, j)`` with admissible length that contain ``[a, b]``.

    Ordered by length, then by start.
    """
    if b - a + 1 != cfg.omega:
        raise ValueError(f"window [{a}, {b}] does not have size {cfg.omega}")
    if not (1 <= a <= b <= n):
        raise IndexError(f"window [{a}, {b}] is outside [1, {n}]")
    out = []
    for length in range(cfg.l_min, cfg.l_max + 1):
        lo, hi = _i_range(n, a, b, length)
        out.extend((i, i + length - 1) for i in range(lo, hi + 1))
    return out


@njit(cache=True)
def _trend_extremes(x, p1, p2, omega, f, l_min, l_max, a_first, a_last):
    # vmin/vmax[w, d]: extreme trend value at the centre of segment d of
    # window a_first + w, over every containing subsequence.
    n = x.shape[0]
    m = omega // f
    count = a_last - a_first + 1
    vmin = np.full((count, f), np.inf)
    vmax = np.full((count, f), -np.inf)
    alpha = np.empty(a_last - a_first + 1 + l_max)
    beta = np.empty(a_last - a_first + 1 + l_max)
    for length in range(l_min, l_max + 1):
        if length > n:
            break
        i_first = max(1, a_first + omega - length)
        i_last = min(a_last, n - length + 1)
        if i_first > i_last:
            continue
        lf = float(length)
        sum_k = lf * (lf + 1.0) / 2.0
        sum_kk = lf * (lf + 1.0) * (2.0 * lf + 1.0) / 6.0
        denom = lf * sum_kk - sum_k * sum_k
        for i in range(i_first, i_last + 1):
            j = i + length - 1
            sum_x = p1[j] - p1[i - 1]
            sum_kx = (p2[j] - p2[i - 1]) - (i - 1) * sum_x
            al = (lf * sum_kx - sum_k * sum_x) / denom
            alpha[i - i_first] = al
            beta[i - i_first] = sum_x / lf - al * sum_k / lf
        for w in range(count):
            a = a_first + w
            lo_i = max(1, a + omega - length)
            hi_i = min(a, n - length + 1)
            if lo_i > hi_i:
                continue
            for d in range(f):
                # local index of the segment centre within S[i:j] is centre - (i - 1)
                centre = a - 1 + d * m + (m + 1) / 2.0
                mn = np.inf
                mx = -np.inf
                for i in range(lo_i, hi_i + 1):
                    v = alpha[i - i_first] * (centre - (i - 1)) + beta[i - i_first]
                    if v < mn:
                        mn = v
                    if v > mx:
                        mx = v
                if mn < vmin[w, d]:
                    vmin[w, d] = mn
                if mx > vmax[w, d]:
                    vmax[w, d] = mx
    return vmin, vmax


@njit(cache=True)
def _segment_means(x, omega, f, a_first, a_last):
    m = omega // f
    count = a_last - a_first + 1
    out = np.empty((count, f))
    for w in range(count):
        base = a_first - 1 + w
        for d in range(f):
            acc = 0.0
            for t in range(m):
                acc += x[base + d * m + t]
            out[w, d] = acc / m
    return out


def build_ld_mbr_arrays(
    s: TimeSeries,
    ps: PrefixSums,
    cfg: BuildConfig,
    a_first: int = 1,
    a_last: int | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """LD-MBR bounds for windows starting at ``a_first..a_last``.

    Returns ``(lo, hi)`` arrays of shape ``(count, f)``; row ``r`` belongs to
    the window starting at ``a_first + r``.
    """
    n = s.n
    if n < cfg.l_min:
        raise ConfigError(f"series length {n} is shorter than l_min={cfg.l_min}")
    last_window = n - cfg.omega + 1
    a_last = last_window if a_last is None else a_last
    if not (1 <= a_first <= a_last <= last_window):
        raise IndexError(f"window starts [{a_first}, {a_last}] are outside [1, {last_window}]")
    vmin, vmax = _trend_extremes(
        s.values, ps.p1, ps.p2, cfg.omega, cfg.f, cfg.l_min, cfg.l_max, a_first, a_last
    )
    means = _segment_means(s.values, cfg.omega, cfg.f, a_first, a_last)
    scale = math.sqrt(cfg.segment)
    return scale * (means - vmax), scale * (means - vmin)


def build_ld_mbr(s: TimeSeries, ps: PrefixSums, a: int, cfg: BuildConfig) -> LdMbr:
    """LD-MBR of the single window starting at ``a``."""
    lo, hi = build_ld_mbr_arrays(s, ps, cfg, a, a)
    return LdMbr(lo[0], hi[0])
