"""Linear-detrending subsequence matching with an LD-MBR index."""

from .bench import BenchSpec, calibrate_epsilon, extract_query, generate_random_walk, run_benchmark
from .detrend import LdSequence, TrendLine, detrend, fit_trend, fit_trend_range, ld_window_values
from .exceptions import ConfigError, DataError, EquivalenceError, IndexFormatError, LdMatchError
from .features import LdMbr, mbr_of_points, mindist, paa
from .index import LdIndex, build_index, load_index, range_query, save_index
from .ldmbr import BuildConfig, build_ld_mbr, enumerate_containing_subsequences
from .matching import (
    MatchResult,
    candidate_offset,
    indexed_match,
    ld_distance,
    ld_seq_scan,
    query_window_count,
)
from .timeseries import PrefixSums, TimeSeries, build_prefix_sums, load_series, range_sums, save_series

__version__ = "0.1.0"
