"""Least-squares trend lines and linear detrending.

A trend is always fitted and evaluated in the local coordinate
``k = 1..len`` of the (sub)sequence it was fitted on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .timeseries import PrefixSums, TimeSeries, range_sums

__all__ = [
    "TrendLine",
    "LdSequence",
    "fit_trend",
    "fit_trend_range",
    "detrend",
    "ld_window_values",
]


@njit(cache=True)
def _alpha_beta(n, sum_x, sum_kx):
    nf = float(n)
    sum_k = nf * (nf + 1.0) / 2.0
    sum_kk = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 6.0
    alpha = (nf * sum_kx - sum_k * sum_x) / (nf * sum_kk - sum_k * sum_k)
    beta = sum_x / nf - alpha * sum_k / nf
    return alpha, beta


@njit(cache=True)
def _fit_slice(x, start, length):
    # sequential sums; the scan and the query side share this exact loop
    sum_x = 0.0
    sum_kx = 0.0
    for k in range(length):
        v = x[start + k]
        sum_x += v
        sum_kx += (k + 1) * v
    return _alpha_beta(length, sum_x, sum_kx)


@njit(cache=True)
def _residuals(x, start, length, alpha, beta, out):
    for k in range(length):
        out[k] = x[start + k] - (alpha * (k + 1) + beta)


@dataclass(frozen=True)
class TrendLine:
    """``g(k) = alpha*k + beta`` for local index ``k`` in ``[1, length]``."""

    alpha: float
    beta: float
    length: int

    def __call__(self, k):
        return self.alpha * k + self.beta

    def values(self) -> np.ndarray:
        return self(np.arange(1, self.length + 1, dtype=np.float64))


@dataclass(frozen=True, eq=False)
class LdSequence:
    """Residuals of a (sub)sequence after removing its own trend line."""

    values: np.ndarray
    source_range: tuple[int, int]
    trend: TrendLine

    def __len__(self) -> int:
        return self.values.shape[0]


def _as_array(x) -> np.ndarray:
    arr = np.ascontiguousarray(x, dtype=np.float64).reshape(-1)
    if arr.shape[0] < 2:
        raise ValueError(f"a trend needs at least 2 points, got {arr.shape[0]}")
    return arr


def fit_trend(x) -> TrendLine:
    """Least-squares line through ``x`` against ``k = 1..n``."""
    arr = _as_array(x)
    alpha, beta = _fit_slice(arr, 0, arr.shape[0])
    return TrendLine(float(alpha), float(beta), arr.shape[0])


def fit_trend_range(ps: PrefixSums, i: int, j: int) -> TrendLine:
    """Trend of ``S[i:j]`` in O(1) from prefix sums."""
    sum_x, sum_kx = range_sums(ps, i, j)
    length = j - i + 1
    if length < 2:
        raise ValueError(f"a trend needs at least 2 points, got range [{i}, {j}]")
    alpha, beta = _alpha_beta(length, sum_x, sum_kx)
    return TrendLine(float(alpha), float(beta), length)


def detrend(x, source_range: tuple[int, int] | None = None) -> LdSequence:
    """Subtract the least-squares line from ``x``."""
    arr = _as_array(x)
    n = arr.shape[0]
    alpha, beta = _fit_slice(arr, 0, n)
    out = np.empty(n)
    _residuals(arr, 0, n, alpha, beta, out)
    out.setflags(write=False)
    return LdSequence(out, source_range or (1, n), TrendLine(float(alpha), float(beta), n))


def ld_window_values(s: TimeSeries, ps: PrefixSums, a: int, b: int, i: int, j: int) -> np.ndarray:
    """Window ``S[a:b]`` detrended by the trend line of the containing ``S[i:j]``.

    Position ``t`` maps to ``S[t] - g(t - i + 1)``, i.e. exactly the slice
    ``a-i+1 .. b-i+1`` of the LD-sequence of ``S[i:j]``.
    """
    if not (1 <= i <= a <= b <= j <= s.n):
        raise ValueError(f"window [{a}, {b}] is not contained in subsequence [{i}, {j}] of a length-{s.n} series")
    g = fit_trend_range(ps, i, j)
    local = np.arange(a - i + 1, b - i + 2, dtype=np.float64)
    return s.values[a - 1 : b] - (g.alpha * local + g.beta)
