"""Distinct counting with a self-learning bitmap.

The sketch adapts its sampling rate as it fills, which keeps the
relative error of the count essentially constant over the whole design
range 1..N. The package bundles the dimensioning rule that picks the
schedule for a memory budget, the sketch itself, classic baselines
(linear counting, LogLog, HyperLogLog), an exact Markov-chain oracle
for verifying the estimator, a Monte Carlo harness, and a CLI.
"""

from sbitmap.baselines import LinearCounter, LogRegisterSketch
from sbitmap.dimensioning import (
    CapacityParams,
    RateTable,
    approx_memory,
    build_rate_table,
    hll_memory_model,
    loglog_memory_model,
    required_memory,
    solve_capacity,
)
from sbitmap.errors import (
    Error,
    InvalidInput,
    NoSolution,
    ResourceLimit,
    Saturated,
)
from sbitmap.hashing import HashSplit, digest, digest_pairs, split
from sbitmap.oracle import (
    FillDistribution,
    chain_simulate,
    estimate_moments,
    exact_fill_distribution,
    truncation_mass,
    waiting_time_simulate,
)
from sbitmap.serialize import dumps, loads
from sbitmap.sketch import Estimate, SBitmap

__version__ = "0.1.0"

__all__ = [
    "CapacityParams",
    "Error",
    "Estimate",
    "FillDistribution",
    "HashSplit",
    "InvalidInput",
    "LinearCounter",
    "LogRegisterSketch",
    "NoSolution",
    "RateTable",
    "ResourceLimit",
    "SBitmap",
    "Saturated",
    "__version__",
    "approx_memory",
    "build_rate_table",
    "chain_simulate",
    "digest",
    "digest_pairs",
    "dumps",
    "estimate_moments",
    "exact_fill_distribution",
    "hll_memory_model",
    "loads",
    "loglog_memory_model",
    "required_memory",
    "solve_capacity",
    "split",
    "truncation_mass",
    "waiting_time_simulate",
]
