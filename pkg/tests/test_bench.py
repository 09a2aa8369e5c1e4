import csv
import io

import numpy as np
import pytest

from ldmatch import BenchSpec, ConfigError, EquivalenceError, TimeSeries, calibrate_epsilon, extract_query, generate_random_walk, ld_seq_scan, run_benchmark
from ldmatch import bench
from ldmatch.bench import CSV_HEADER, write_report


def test_random_walk_deterministic():
    a = generate_random_walk(500, seed=3)
    b = generate_random_walk(500, seed=3)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.values[0] == 0.0
    assert a.name == "randomwalk-3"
    assert not np.array_equal(a.values, generate_random_walk(500, seed=4).values)


def test_random_walk_steps_have_requested_scale():
    s = generate_random_walk(100_000, seed=0, sigma=2.5)
    assert s.n == 100_000
    assert np.std(np.diff(s.values)) == pytest.approx(2.5, rel=0.02)


@pytest.mark.parametrize("kwargs", [{"n": 1, "seed": 0}, {"n": 10, "seed": 0, "sigma": 0.0}, {"n": 10, "seed": 0, "sigma": -1}])
def test_random_walk_rejects_bad_args(kwargs):
    with pytest.raises(ConfigError):
        generate_random_walk(**kwargs)


def test_extract_query(walk):
    whole = extract_query(walk, walk.n, np.random.default_rng(0))
    assert np.array_equal(whole.values, walk.values)
    offsets = [extract_query(walk, 64, np.random.default_rng(9)).name for _ in range(2)]
    assert offsets[0] == offsets[1]
    rng = np.random.default_rng(1)
    q = extract_query(walk, 100, rng)
    i = int(q.name.rsplit("@", 1)[1])
    assert i in ld_seq_scan(walk, q, 0.0).offsets.tolist()
    with pytest.raises(ConfigError):
        extract_query(walk, walk.n + 1, rng)


def test_extract_query_reproducible_sequence(walk):
    first = [extract_query(walk, 64, rng).name for rng in [np.random.default_rng(2)] for _ in range(20)]
    second = [extract_query(walk, 64, rng).name for rng in [np.random.default_rng(2)] for _ in range(20)]
    assert first == second


def test_calibrate_examples(walk):
    q = TimeSeries(walk.subsequence(333, 396))
    total = walk.n - 64 + 1
    assert len(ld_seq_scan(walk, q, calibrate_epsilon(walk, q, 1.0))) == total
    eps = calibrate_epsilon(walk, q, 1 / total)
    assert ld_seq_scan(walk, q, eps).offsets.tolist() == [333]
    assert len(ld_seq_scan(walk, q, calibrate_epsilon(walk, q, 1e-2))) == round(1e-2 * total)
    for bad in (0.0, -0.1, 1.5):
        with pytest.raises(ConfigError):
            calibrate_epsilon(walk, q, bad)


def test_calibrate_with_ties():
    s = TimeSeries(np.tile([0.0, 1.0, 0.0, -1.0], 64))
    q = TimeSeries(s.subsequence(1, 16))
    eps = calibrate_epsilon(s, q, 0.01)
    # periodic data: many exact zeros, so the tie rule returns the shared value
    assert eps == pytest.approx(0.0, abs=1e-9)
    assert len(ld_seq_scan(s, q, eps)) >= 2


def test_spec_validation():
    with pytest.raises(ConfigError):
        BenchSpec(trials=0)
    with pytest.raises(ConfigError):
        BenchSpec(selectivities=(0.0,))
    with pytest.raises(ConfigError):
        BenchSpec(query_lengths=(512,))
    with pytest.raises(ConfigError):
        BenchSpec.from_mapping({"bogus": 1})


def test_spec_from_toml(tmp_path):
    path = tmp_path / "b.toml"
    path.write_text("[bench]\nn = 2048\nquery_lengths = [64, 128]\nselectivities = [0.01]\ntrials = 3\n")
    spec = BenchSpec.from_toml(path)
    assert (spec.n, spec.query_lengths, spec.selectivities, spec.trials) == (2048, (64, 128), (0.01,), 3)


def test_small_benchmark_and_report(tmp_path):
    spec = BenchSpec(n=1024, omega=32, f=4, l_min=32, l_max=96, query_lengths=(32, 96), selectivities=(1e-2,), trials=3)
    rows = run_benchmark(spec)
    assert [(r.query_len, r.selectivity) for r in rows] == [(32, 1e-2), (96, 1e-2)]
    for r in rows:
        assert len(r.trials) == 3
        assert r.pruning_ratio == pytest.approx(r.candidates_mean / (1024 - r.query_len + 1))
        assert r.matches_mean == round(1e-2 * (1024 - r.query_len + 1))
    out = tmp_path / "r.csv"
    text = write_report(rows, out)
    raw = out.read_bytes()
    assert b"\r" not in raw and raw.decode() == text
    assert text.splitlines()[0] == "query_len,selectivity,epsilon_mean,scan_ms_mean,index_ms_mean,speedup,candidates_mean,matches_mean,pruning_ratio"
    table = list(csv.reader(io.StringIO(text)))
    assert table[0] == list(CSV_HEADER) and len(table) == 3
    again = run_benchmark(spec)
    assert [t.offset for r in again for t in r.trials] == [t.offset for r in rows for t in r.trials]
    assert [r.epsilon_mean for r in again] == [r.epsilon_mean for r in rows]


def test_mismatch_aborts_with_bundle(monkeypatch):
    real = bench.indexed_match

    def lossy(idx, s, q, eps):
        res = real(idx, s, q, eps)
        res.offsets = res.offsets[1:]
        return res

    monkeypatch.setattr(bench, "indexed_match", lossy)
    spec = BenchSpec(n=512, omega=32, f=4, l_min=32, l_max=64, query_lengths=(64,), selectivities=(1e-2,), trials=2, seed=11)
    with pytest.raises(EquivalenceError) as info:
        run_benchmark(spec)
    bundle = info.value.bundle
    assert bundle["seed"] == 11 and bundle["query_len"] == 64
    assert bundle["missing"] and not bundle["extra"]
    assert {"epsilon", "query_offset", "trial"} <= set(bundle)
