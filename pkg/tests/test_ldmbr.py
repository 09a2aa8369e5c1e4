import math

import numpy as np
import pytest

from ldmatch import BuildConfig, ConfigError, TimeSeries, build_ld_mbr, build_prefix_sums, enumerate_containing_subsequences, paa
from ldmatch.detrend import detrend, fit_trend_range, ld_window_values
from ldmatch.ldmbr import build_ld_mbr_arrays

from oracles import brute_force_containing, nested_loop_points


@pytest.mark.parametrize(
    "args",
    [(0, 8, 8, 8), (64, 100, 128, 256), (32, 5, 64, 128), (32, 8, 16, 64), (32, 8, 64, 32), (True, 1, 2, 2)],
)
def test_build_config_validation(args):
    with pytest.raises(ConfigError):
        BuildConfig(*args)


def test_enumerate_examples():
    cfg = BuildConfig(4, 2, 4, 4)
    assert enumerate_containing_subsequences(10, 1, 4, cfg) == [(1, 4)]
    cfg = BuildConfig(4, 2, 6, 6)
    assert enumerate_containing_subsequences(10, 3, 6, cfg) == [(1, 6), (2, 7), (3, 8)]


def test_enumerate_against_brute_force():
    cfg = BuildConfig(4, 2, 4, 6)
    for a in range(1, 10):
        got = enumerate_containing_subsequences(12, a, a + 3, cfg)
        want = brute_force_containing(12, a, a + 3, 4, 6)
        assert got == sorted(want, key=lambda ij: (ij[1] - ij[0], ij[0]))
    assert len(enumerate_containing_subsequences(12, 5, 8, cfg)) == 1 + 2 + 3


def test_enumerate_errors():
    cfg = BuildConfig(4, 2, 4, 6)
    with pytest.raises(ValueError):
        enumerate_containing_subsequences(12, 1, 5, cfg)
    with pytest.raises(IndexError):
        enumerate_containing_subsequences(12, 10, 13, cfg)


def test_linear_series_gives_degenerate_box_at_origin():
    s = TimeSeries(0.5 * np.arange(64.0) + 3)
    ps = build_prefix_sums(s)
    cfg = BuildConfig(8, 4, 16, 24)
    for a in (1, 20, 57):
        box = build_ld_mbr(s, ps, a, cfg)
        assert np.allclose(box.lo, 0, atol=1e-9) and np.allclose(box.hi, 0, atol=1e-9)


def test_single_mapping_is_a_point(walk, walk_ps):
    cfg = BuildConfig(32, 8, 32, 32)
    box = build_ld_mbr(walk, walk_ps, 100, cfg)
    want = paa(detrend(walk.values[99:131]).values, 8)
    assert box.lo == pytest.approx(want, abs=1e-9)
    assert box.hi == pytest.approx(want, abs=1e-9)


@pytest.fixture(scope="module")
def desk():
    s = TimeSeries(np.random.default_rng(3).normal(size=64).cumsum(), name="desk")
    return s, build_prefix_sums(s), BuildConfig(8, 4, 16, 24)


def test_box_equals_nested_loop_oracle(desk):
    s, ps, cfg = desk
    lo, hi = build_ld_mbr_arrays(s, ps, cfg)
    assert lo.shape == (64 - 8 + 1, 4)
    for a in range(1, 58):
        pts = nested_loop_points(s.values, a, cfg.omega, cfg.f, cfg.l_min, cfg.l_max)
        # containment and minimality (every face touched)
        assert np.all(pts >= lo[a - 1] - 1e-9) and np.all(pts <= hi[a - 1] + 1e-9)
        assert pts.min(axis=0) == pytest.approx(lo[a - 1], abs=1e-9)
        assert pts.max(axis=0) == pytest.approx(hi[a - 1], abs=1e-9)


def test_single_window_matches_batch(desk):
    s, ps, cfg = desk
    lo, hi = build_ld_mbr_arrays(s, ps, cfg)
    for a in (1, 17, 57):
        box = build_ld_mbr(s, ps, a, cfg)
        assert np.array_equal(box.lo, lo[a - 1]) and np.array_equal(box.hi, hi[a - 1])


def test_widening_length_range_never_shrinks(desk):
    s, ps, _ = desk
    narrow = build_ld_mbr_arrays(s, ps, BuildConfig(8, 4, 18, 20))
    wide = build_ld_mbr_arrays(s, ps, BuildConfig(8, 4, 16, 24))
    assert np.all(wide[0] <= narrow[0]) and np.all(wide[1] >= narrow[1])


def test_affine_structure(desk):
    s, ps, cfg = desk
    m = cfg.segment
    a = 30
    b = a + cfg.omega - 1
    raw = paa(s.values[a - 1 : b], cfg.f)
    ones = paa(np.ones(cfg.omega), cfg.f)
    for i, j in enumerate_containing_subsequences(s.n, a, b, cfg):
        g = fit_trend_range(ps, i, j)
        ramp = paa(np.arange(a - i + 1, b - i + 2, dtype=float), cfg.f)
        point = paa(ld_window_values(s, ps, a, b, i, j), cfg.f)
        assert point == pytest.approx(raw - g.alpha * ramp - g.beta * ones, abs=1e-9)
    assert ones == pytest.approx([math.sqrt(m)] * cfg.f)


def test_build_needs_l_min_points():
    s = TimeSeries(np.arange(10.0))
    with pytest.raises(ConfigError):
        build_ld_mbr_arrays(s, build_prefix_sums(s), BuildConfig(4, 2, 12, 12))
