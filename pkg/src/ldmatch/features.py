"""Scaled PAA features, bounding boxes and point-to-box distance.

PAA coordinates are multiplied by ``sqrt(omega / f)``. With that factor the
plain Euclidean distance between two feature points never exceeds the
distance between the windows they came from, so a feature-space radius can
be used directly as a lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

__all__ = [
    "LdMbr",
    "paa",
    "paa_distance_lower_bound_check",
    "mbr_of_points",
    "mindist",
    "mindist_many",
]


def paa(window, f: int) -> np.ndarray:
    """Segment means of ``window`` scaled by ``sqrt(len(window) / f)``."""
    x = np.asarray(window, dtype=np.float64).reshape(-1)
    omega = x.shape[0]
    if f <= 0 or omega % f:
        raise ValueError(f"window length {omega} is not divisible by f={f}")
    m = omega // f
    return x.reshape(f, m).mean(axis=1) * math.sqrt(m)


def paa_distance_lower_bound_check(x, y, f: int) -> bool:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    feature_dist = float(np.linalg.norm(paa(x, f) - paa(y, f)))
    return feature_dist <= float(np.linalg.norm(x - y)) + 1e-9


@dataclass(frozen=True, eq=False)
class LdMbr:
    """Axis-aligned box ``[lo, hi]`` in feature space.

    The empty box has ``lo = +inf`` and ``hi = -inf`` in every dimension.
    """

    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        lo = np.array(self.lo, dtype=np.float64).reshape(-1)
        hi = np.array(self.hi, dtype=np.float64).reshape(-1)
        if lo.shape != hi.shape:
            raise ValueError(f"lo/hi dimensionality differs: {lo.shape} vs {hi.shape}")
        empty = np.all(lo == np.inf) and np.all(hi == -np.inf)
        if not empty and not np.all(lo <= hi):
            raise ValueError("lo must not exceed hi in any dimension")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def empty(cls, f: int) -> "LdMbr":
        return cls(np.full(f, np.inf), np.full(f, -np.inf))

    @property
    def dim(self) -> int:
        return self.lo.shape[0]

    def is_empty(self) -> bool:
        return bool(np.any(self.lo > self.hi))

    def contains(self, point, tol: float = 0.0) -> bool:
        p = np.asarray(point, dtype=np.float64)
        return bool(np.all(self.lo - tol <= p) and np.all(p <= self.hi + tol))

    def contains_box(self, other: "LdMbr", tol: float = 0.0) -> bool:
        if other.is_empty():
            return True
        return bool(np.all(self.lo - tol <= other.lo) and np.all(other.hi <= self.hi + tol))

    def including(self, point) -> "LdMbr":
        p = np.asarray(point, dtype=np.float64)
        return LdMbr(np.minimum(self.lo, p), np.maximum(self.hi, p))

    def __eq__(self, other):
        if not isinstance(other, LdMbr):
            return NotImplemented
        return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)

    def __repr__(self):
        return f"LdMbr(lo={self.lo.tolist()}, hi={self.hi.tolist()})"


def mbr_of_points(points: Iterable) -> LdMbr:
    pts = [np.asarray(p, dtype=np.float64).reshape(-1) for p in points]
    if not pts:
        raise ValueError("cannot bound an empty set of points")
    dims = {p.shape[0] for p in pts}
    if len(dims) != 1:
        raise ValueError(f"points have mixed dimensionality {sorted(dims)}")
    stacked = np.vstack(pts)
    return LdMbr(stacked.min(axis=0), stacked.max(axis=0))


def mindist(p, m: LdMbr) -> float:
    """Smallest Euclidean distance from ``p`` to any point of box ``m``."""
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    if p.shape[0] != m.dim:
        raise ValueError(f"point has {p.shape[0]} dims, box has {m.dim}")
    if m.is_empty():
        raise ValueError("mindist to an empty box is undefined")
    return float(mindist_many(p, m.lo[None, :], m.hi[None, :])[0])


def mindist_many(p: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorised :func:`mindist` of one point against rows of ``lo``/``hi``."""
    delta = np.maximum(lo - p, 0.0) + np.maximum(p - hi, 0.0)
    return np.sqrt(np.einsum("ij,ij->i", delta, delta))
