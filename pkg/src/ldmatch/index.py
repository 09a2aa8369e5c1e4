"""The LD-MBR index: one record per sliding window plus a packed R-tree.

The tree is bulk loaded with sort-tile-recursive packing over record
centres and is never serialised; loading an index file rebuilds it from the
records, so two loads of the same file answer queries identically.
"""

from __future__ import annotations

import logging
import math
import struct
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, NamedTuple

import numpy as np

from .exceptions import ConfigError, DataError, IndexFormatError
from .features import LdMbr, mindist_many
from .ldmbr import BuildConfig, build_ld_mbr_arrays
from .timeseries import PrefixSums, TimeSeries, build_prefix_sums

__all__ = [
    "IndexMeta",
    "IndexRecord",
    "LdIndex",
    "build_index",
    "range_query",
    "flat_range_query",
    "save_index",
    "load_index",
    "FORMAT_VERSION",
    "DEFAULT_NODE_CAPACITY",
]

log = logging.getLogger(__name__)

MAGIC = b"LDIX"
FORMAT_VERSION = 1
DEFAULT_NODE_CAPACITY = 64


@dataclass(frozen=True)
class IndexMeta:
    n: int
    omega: int
    f: int
    l_min: int
    l_max: int
    name: str
    version: int = FORMAT_VERSION

    @property
    def config(self) -> BuildConfig:
        return BuildConfig(self.omega, self.f, self.l_min, self.l_max)


class IndexRecord(NamedTuple):
    mbr: LdMbr
    offset: int


@dataclass(frozen=True, eq=False)
class _Level:
    lo: np.ndarray
    hi: np.ndarray
    # children of node k are child_index[start[k]:start[k + 1]] on the level below
    start: np.ndarray
    child_index: np.ndarray


def _str_order(centres: np.ndarray, capacity: int) -> np.ndarray:
    """Sort-tile-recursive ordering of the rows of ``centres``."""
    dims = centres.shape[1]

    def tile(idx: np.ndarray, dim: int) -> list[np.ndarray]:
        idx = idx[np.argsort(centres[idx, dim], kind="stable")]
        if dim == dims - 1 or idx.shape[0] <= capacity:
            return [idx]
        pages = math.ceil(idx.shape[0] / capacity)
        slabs = math.ceil(pages ** (1.0 / (dims - dim)))
        slab_size = capacity * math.ceil(pages / slabs)
        parts = []
        for lo in range(0, idx.shape[0], slab_size):
            parts.extend(tile(idx[lo : lo + slab_size], dim + 1))
        return parts

    return np.concatenate(tile(np.arange(centres.shape[0]), 0))


def _pack_level(lo: np.ndarray, hi: np.ndarray, capacity: int) -> _Level:
    order = _str_order((lo + hi) / 2.0, capacity)
    count = order.shape[0]
    start = np.append(np.arange(0, count, capacity), count)
    node_lo = np.minimum.reduceat(lo[order], start[:-1], axis=0)
    node_hi = np.maximum.reduceat(hi[order], start[:-1], axis=0)
    return _Level(node_lo, node_hi, start, order)


class _PackedRTree:
    """Read-only R-tree; levels[0] is the root level, levels[-1] points at records."""

    def __init__(self, lo: np.ndarray, hi: np.ndarray, capacity: int):
        if capacity < 2:
            raise ConfigError(f"node capacity must be >= 2, got {capacity}")
        self.capacity = capacity
        levels = []
        cur_lo, cur_hi = lo, hi
        while True:
            level = _pack_level(cur_lo, cur_hi, capacity)
            levels.append(level)
            if level.lo.shape[0] == 1:
                break
            cur_lo, cur_hi = level.lo, level.hi
        self.levels = levels[::-1]

    @property
    def root(self) -> LdMbr:
        top = self.levels[0]
        return LdMbr(top.lo[0], top.hi[0])

    def search(self, q: np.ndarray, r: float, rec_lo: np.ndarray, rec_hi: np.ndarray) -> np.ndarray:
        active = np.zeros(1, dtype=np.int64)
        for depth, level in enumerate(self.levels):
            keep = mindist_many(q, level.lo[active], level.hi[active]) <= r
            active = active[keep]
            if active.size == 0:
                return active
            begin = level.start[active]
            lens = level.start[active + 1] - begin
            pos = np.repeat(begin - np.cumsum(lens) + lens, lens) + np.arange(lens.sum())
            active = level.child_index[pos]
        keep = mindist_many(q, rec_lo[active], rec_hi[active]) <= r
        return active[keep]

    def iter_nodes(self) -> Iterator[tuple[LdMbr, np.ndarray, int]]:
        """Yield ``(box, child ids, depth)`` for every node."""
        for depth, level in enumerate(self.levels):
            for k in range(level.lo.shape[0]):
                kids = level.child_index[level.start[k] : level.start[k + 1]]
                yield LdMbr(level.lo[k], level.hi[k]), kids, depth


class LdIndex:
    """Records for window offsets ``1..n-omega+1`` (row ``r`` is offset ``r+1``)."""

    def __init__(self, meta: IndexMeta, lo: np.ndarray, hi: np.ndarray, node_capacity: int = DEFAULT_NODE_CAPACITY):
        expected = meta.n - meta.omega + 1
        if lo.shape != (expected, meta.f) or hi.shape != (expected, meta.f):
            raise DataError(
                f"index arrays have shape {lo.shape}/{hi.shape}, expected ({expected}, {meta.f})"
            )
        meta.config  # validates omega/f/l_min/l_max
        self.meta = meta
        self.lo = np.ascontiguousarray(lo, dtype=np.float64)
        self.hi = np.ascontiguousarray(hi, dtype=np.float64)
        self.lo.setflags(write=False)
        self.hi.setflags(write=False)
        self.tree = _PackedRTree(self.lo, self.hi, node_capacity)

    def __len__(self) -> int:
        return self.lo.shape[0]

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(1, len(self) + 1, dtype=np.int64)

    def record(self, offset: int) -> IndexRecord:
        if not 1 <= offset <= len(self):
            raise IndexError(f"no record for offset {offset}")
        return IndexRecord(LdMbr(self.lo[offset - 1], self.hi[offset - 1]), offset)

    def __iter__(self) -> Iterator[IndexRecord]:
        for offset in range(1, len(self) + 1):
            yield self.record(offset)

    def range_query(self, q, r: float) -> np.ndarray:
        return range_query(self, q, r)


def build_index(
    s: TimeSeries,
    cfg: BuildConfig,
    ps: PrefixSums | None = None,
    node_capacity: int = DEFAULT_NODE_CAPACITY,
) -> LdIndex:
    if s.n < cfg.l_min:
        raise ConfigError(f"series length {s.n} is shorter than l_min={cfg.l_min}")
    ps = build_prefix_sums(s) if ps is None else ps
    t0 = time.perf_counter()
    lo, hi = build_ld_mbr_arrays(s, ps, cfg)
    log.info("built %d LD-MBRs in %.2fs", lo.shape[0], time.perf_counter() - t0)
    meta = IndexMeta(s.n, cfg.omega, cfg.f, cfg.l_min, cfg.l_max, s.name)
    return LdIndex(meta, lo, hi, node_capacity)


def _check_query(idx: LdIndex, q, r: float) -> np.ndarray:
    q = np.asarray(q, dtype=np.float64).reshape(-1)
    if q.shape[0] != idx.meta.f:
        raise ValueError(f"query point has {q.shape[0]} dims, index has {idx.meta.f}")
    if not r >= 0:
        raise ValueError(f"radius must be non-negative, got {r}")
    return q


def range_query(idx: LdIndex, q, r: float) -> np.ndarray:
    """Offsets of all records whose box is within MINDIST ``r`` of ``q``, ascending."""
    q = _check_query(idx, q, r)
    rows = idx.tree.search(q, r, idx.lo, idx.hi)
    rows.sort()
    return rows + 1


def flat_range_query(idx: LdIndex, q, r: float) -> np.ndarray:
    """Same contract as :func:`range_query` by scanning every record."""
    q = _check_query(idx, q, r)
    return np.flatnonzero(mindist_many(q, idx.lo, idx.hi) <= r) + 1


_HEADER = struct.Struct("<4sI")
_META = struct.Struct("<QIIIII")
_COUNT = struct.Struct("<Q")


def _record_dtype(f: int) -> np.dtype:
    return np.dtype([("offset", "<u8"), ("lo", "<f8", (f,)), ("hi", "<f8", (f,))])


def save_index(idx: LdIndex, path) -> None:
    meta = idx.meta
    name = meta.name.encode("utf-8")
    records = np.empty(len(idx), dtype=_record_dtype(meta.f))
    records["offset"] = idx.offsets
    records["lo"] = idx.lo
    records["hi"] = idx.hi
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, FORMAT_VERSION))
        fh.write(_META.pack(meta.n, meta.omega, meta.f, meta.l_min, meta.l_max, len(name)))
        fh.write(name)
        fh.write(_COUNT.pack(len(idx)))
        fh.write(records.tobytes())


def _take(buf: memoryview, pos: int, size: int, what: str) -> tuple[memoryview, int]:
    if pos + size > len(buf):
        raise IndexFormatError(f"index file truncated while reading {what}")
    return buf[pos : pos + size], pos + size


def load_index(path, node_capacity: int = DEFAULT_NODE_CAPACITY) -> LdIndex:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise DataError(f"cannot read index {path}: {exc}") from exc
    buf = memoryview(data)
    chunk, pos = _take(buf, 0, _HEADER.size, "header")
    magic, version = _HEADER.unpack(chunk)
    if magic != MAGIC:
        raise IndexFormatError(f"{path} is not an LD index (magic {bytes(magic)!r})")
    if version != FORMAT_VERSION:
        raise IndexFormatError(f"unsupported index version {version}; expected {FORMAT_VERSION}")
    chunk, pos = _take(buf, pos, _META.size, "metadata")
    n, omega, f, l_min, l_max, name_len = _META.unpack(chunk)
    chunk, pos = _take(buf, pos, name_len, "series name")
    try:
        name = bytes(chunk).decode("utf-8")
    except UnicodeDecodeError as exc:
        raise IndexFormatError(f"series name is not valid UTF-8: {exc}") from exc
    chunk, pos = _take(buf, pos, _COUNT.size, "record count")
    (count,) = _COUNT.unpack(chunk)
    try:
        meta = IndexMeta(n, omega, f, l_min, l_max, name)
        meta.config
    except ConfigError as exc:
        raise IndexFormatError(f"index metadata is inconsistent: {exc}") from exc
    if count != n - omega + 1:
        raise IndexFormatError(f"record count {count} does not match n - omega + 1 = {n - omega + 1}")
    dtype = _record_dtype(f)
    chunk, pos = _take(buf, pos, count * dtype.itemsize, "records")
    if pos != len(buf):
        raise IndexFormatError(f"{len(buf) - pos} trailing bytes after the last record")
    records = np.frombuffer(chunk, dtype=dtype)
    if not np.array_equal(records["offset"], np.arange(1, count + 1, dtype=np.uint64)):
        raise IndexFormatError("record offsets are not 1..count in order")
    lo = records["lo"].astype(np.float64)
    hi = records["hi"].astype(np.float64)
    if not (np.isfinite(lo).all() and np.isfinite(hi).all() and (lo <= hi).all()):
        raise IndexFormatError("record boxes are not finite with lo <= hi")
    return LdIndex(meta, lo, hi, node_capacity)
