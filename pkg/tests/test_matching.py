import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ldmatch import (
    BuildConfig,
    ConfigError,
    DataError,
    TimeSeries,
    build_index,
    candidate_offset,
    detrend,
    indexed_match,
    ld_distance,
    ld_seq_scan,
    mindist,
    query_window_count,
)
from ldmatch.bench import calibrate_epsilon
from ldmatch.matching import ld_distances, query_features

from oracles import materialised_ld_distance


def test_query_window_count():
    assert query_window_count(512, 256) == 2
    assert query_window_count(1024, 256) == 4
    assert query_window_count(300, 256) == 1
    assert query_window_count(256, 256) == 1
    with pytest.raises(ConfigError):
        query_window_count(255, 256)


def test_candidate_offset():
    assert candidate_offset(1, 500, 256, 512, 10_000) == 500
    assert candidate_offset(2, 1000, 256, 512, 10_000) == 744
    assert candidate_offset(2, 5, 256, 512, 10_000) is None
    assert candidate_offset(1, 9_600, 256, 512, 10_000) is None
    assert candidate_offset(1, 9_489, 256, 512, 10_000) == 9_489


def test_ld_distance_matches_oracle(walk, rng):
    q = walk.values[300:428] + rng.normal(scale=0.5, size=128)
    qbar = detrend(q)
    for i in rng.integers(1, walk.n - 127, size=50):
        assert ld_distance(walk, int(i), qbar) == pytest.approx(materialised_ld_distance(walk.values, int(i), q), abs=1e-8)


def test_distance_blind_to_added_lines(walk):
    q = walk.values[100:164]
    k = np.arange(1, 65)
    assert ld_distance(walk, 101, detrend(q)) == 0.0
    shifted = detrend(q + 40.0 - 0.3 * k)
    assert ld_distance(walk, 101, shifted) <= 1e-9


def test_ld_distances_bounds(walk):
    with pytest.raises(IndexError):
        ld_distances(walk, [walk.n - 10], detrend(np.zeros(32)))


def test_scan_self_match_and_everything(walk):
    q = TimeSeries(walk.subsequence(200, 263))
    res = ld_seq_scan(walk, q, 0.0)
    assert 200 in res.offsets.tolist()
    assert np.all(res.distances == 0)
    everything = ld_seq_scan(walk, q, 1e12)
    assert everything.offsets.tolist() == list(range(1, walk.n - 63 + 1))


def test_scan_rejects_bad_args(walk):
    with pytest.raises(ConfigError):
        ld_seq_scan(walk, TimeSeries(np.zeros(walk.n + 1)), 1.0)
    with pytest.raises(ConfigError):
        ld_seq_scan(walk, TimeSeries(np.zeros(64)), -1.0)


def test_planted_pattern_found_under_different_trends():
    rng = np.random.default_rng(5)
    pattern = np.sin(np.linspace(0, 6 * math.pi, 64)) * 3
    base = rng.normal(scale=0.05, size=1024)
    k = np.arange(64)
    base[100:164] += pattern + 0.5 * k + 10
    base[600:664] += pattern - 0.2 * k - 30
    s = TimeSeries(base)
    q = TimeSeries(pattern)
    res = ld_seq_scan(s, q, 2.0)
    assert {101, 601} <= set(res.offsets.tolist())
    assert len(res) < 20
    idx = build_index(s, BuildConfig(32, 8, 64, 128))
    assert np.array_equal(indexed_match(idx, s, q, 2.0).offsets, res.offsets)


def test_indexed_equals_scan(walk, small_index, rng):
    for _ in range(12):
        length = int(rng.choice([32, 64, 100, 128]))
        i = int(rng.integers(1, walk.n - length + 2))
        q = TimeSeries(walk.subsequence(i, i + length - 1) + rng.normal(scale=0.2, size=length))
        eps = calibrate_epsilon(walk, q, float(rng.choice([1e-2, 3e-2])))
        scan = ld_seq_scan(walk, q, eps)
        fast = indexed_match(small_index, walk, q, eps)
        assert np.array_equal(scan.offsets, fast.offsets)
        assert np.array_equal(scan.distances, fast.distances)
        assert len(fast) <= fast.stats.post_processed <= fast.stats.candidates


def test_indexed_match_admission(walk, small_index):
    with pytest.raises(ConfigError):
        indexed_match(small_index, walk, TimeSeries(np.zeros(129)), 1.0)
    with pytest.raises(ConfigError):
        indexed_match(small_index, walk, TimeSeries(np.zeros(31)), 1.0)
    other = TimeSeries(walk.values, name="other")
    with pytest.raises(DataError):
        indexed_match(small_index, other, TimeSeries(np.zeros(64)), 1.0)


def test_lower_bound_sandwich(walk, small_index, small_cfg, rng):
    # sqrt(sum_k mindist^2) <= D for every offset; exhaustive on one query
    omega, f = small_cfg.omega, small_cfg.f
    q = walk.values[500:596] + rng.normal(scale=0.3, size=96)
    qbar = detrend(q)
    pts = query_features(qbar.values, omega, f)
    p = pts.shape[0]
    offsets = np.arange(1, walk.n - 96 + 2)
    dist = ld_distances(walk, offsets, qbar)
    for i, d in zip(offsets.tolist(), dist.tolist()):
        parts = [mindist(pts[k], small_index.record(i + k * omega).mbr) for k in range(p)]
        assert math.sqrt(p) * min(parts) <= d + 1e-6
        assert math.sqrt(sum(x * x for x in parts)) <= d + 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([32, 48, 64, 96, 128]), st.floats(0, 30))
def test_indexed_equals_scan_property(walk, small_index, seed, length, eps):
    rng = np.random.default_rng(seed)
    i = int(rng.integers(1, walk.n - length + 2))
    q = TimeSeries(walk.subsequence(i, i + length - 1) + rng.normal(scale=1.0, size=length))
    assert np.array_equal(ld_seq_scan(walk, q, eps).offsets, indexed_match(small_index, walk, q, eps).offsets)


def test_results_monotone_in_epsilon(walk, small_index):
    q = TimeSeries(walk.subsequence(40, 103))
    prev = set()
    for eps in (0.0, 2.0, 5.0, 10.0, 20.0):
        cur = set(indexed_match(small_index, walk, q, eps).offsets.tolist())
        assert prev <= cur
        prev = cur
