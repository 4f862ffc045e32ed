"""Monte Carlo evaluation protocol for the sketches.

Sweeps replicate real hashed streams: for each (n, replicate) cell a
fresh sketch ingests n distinct synthetic items, and relative errors
are aggregated into L1, RRMSE and 99%-quantile metrics. Synthetic items
are 16-byte counters namespaced per cell, so replicates see disjoint
item sets while everything stays reproducible from one seed. Analytic
memory tables and a scale-invariance summary round out the protocol.
"""

from __future__ import annotations

import csv
import math
import struct
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from sbitmap import hashing
from sbitmap.baselines import LinearCounter, LogRegisterSketch
from sbitmap.dimensioning import (
    build_rate_table,
    hll_memory_model,
    required_memory,
    solve_capacity,
)
from sbitmap.errors import InvalidInput
from sbitmap.sketch import DEFAULT_SAMPLER_WIDTH, SBitmap

DEFAULT_REPLICATES = 300

REPORT_HEADER = ("n", "replicates", "mean", "l1", "rrmse", "q99", "theory")
MEMORY_HEADER = ("epsilon", "N", "sbitmap_bits", "hll_bits", "ratio")
COMPARISON_HEADER = ("sketch",) + REPORT_HEADER


@dataclass(frozen=True)
class TrialReport:
    """Error metrics for one cardinality over many replicates.

    mean_estimate: average n_hat
    l1: mean |n_hat/n - 1|
    rrmse: sqrt(mean (n_hat/n - 1)^2)  (always >= l1)
    q99: 99% quantile of |n_hat/n - 1| (linear-interpolated order stat)
    theoretical_rrmse: the sketch family's design error (nan if none)
    """

    n: int
    replicates: int
    mean_estimate: float
    l1: float
    rrmse: float
    q99: float
    theoretical_rrmse: float

    def __post_init__(self):
        if self.replicates < 2:
            raise InvalidInput(f"need >= 2 replicates, got {self.replicates}")


@dataclass(frozen=True)
class InvarianceSummary:
    """How flat the error curve is across the tested range.

    ns: cardinalities that entered the summary (n >= 100 only; below
        that the discrete estimator granularity dominates)
    max_min_ratio: max/min of empirical RRMSE over ns
    z_scores: per-n (rrmse^2/eps^2 - 1) * sqrt(R/2), the standardized
        deviation from the design error under the chi-square sampling
        law of a squared-error estimate
    """

    ns: tuple[int, ...]
    max_min_ratio: float
    z_scores: tuple[float, ...]


class MemoryRow(NamedTuple):
    epsilon: float
    N: int
    sbitmap_bits: int
    hll_bits: int
    ratio: float


def stream_id(seed: int, n: int, replicate: int) -> int:
    """Deterministic 64-bit namespace for one (n, replicate) cell.

    Item i of the cell is the byte string struct.pack('<QQ', sid, i);
    sketches ingest them via consume_stream(sid, n).
    """
    return hashing.digest(seed, struct.pack("<QQ", n, replicate))


def synthetic_items(seed: int, n: int, replicate: int):
    """The cell's items as actual byte strings (n of them, all distinct)."""
    sid = stream_id(seed, n, replicate)
    return [struct.pack("<QQ", sid, i) for i in range(n)]


def sketch_factory(
    kind: str,
    memory_bits: int,
    N: int,
    seed: int = 0,
    d: int = DEFAULT_SAMPLER_WIDTH,
) -> Callable[[], object]:
    """Zero-arg constructor for an equal-memory sketch of the given kind.

    Kinds: sbitmap, linear, loglog, hyperloglog (alias hll). Register
    sketches get memory_bits // 5 registers per the 5-bit accounting.
    """
    kind = kind.lower()
    if kind == "sbitmap":
        params = solve_capacity(memory_bits, N)
        rates = build_rate_table(params)
        return lambda: SBitmap(params, rates, seed=seed, d=d)
    if kind == "linear":
        return lambda: LinearCounter(memory_bits, seed=seed)
    if kind in ("hll", "hyperloglog", "loglog"):
        mode = "loglog" if kind == "loglog" else "hyperloglog"
        return lambda: LogRegisterSketch.with_memory(memory_bits, seed=seed, mode=mode)
    raise InvalidInput(f"unknown sketch kind {kind!r}")


def _estimate_value(sketch) -> float:
    est = sketch.estimate()
    return est.n_hat if hasattr(est, "n_hat") else float(est)


def rrmse_sweep(
    factory: Callable[[], object],
    n_grid: Sequence[int],
    replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
) -> list[TrialReport]:
    """Empirical error metrics over a grid of true cardinalities.

    Deterministic given (factory, n_grid, replicates, seed). Each
    replicate ingests its own n distinct items into a fresh sketch.
    """
    if not n_grid:
        raise InvalidInput("empty n grid")
    n_grid = [int(n) for n in n_grid]
    if min(n_grid) < 1:
        raise InvalidInput(f"cardinalities must be >= 1, got {min(n_grid)}")
    if replicates < 2:
        raise InvalidInput(f"need >= 2 replicates, got {replicates}")
    probe = factory()
    params = getattr(probe, "params", None)
    if params is not None and max(n_grid) > params.N:
        raise InvalidInput(
            f"n={max(n_grid)} exceeds the design range N={params.N}"
        )
    theory = float(probe.design_rrmse)
    reports = []
    for n in n_grid:
        estimates = np.empty(replicates)
        for rep in range(replicates):
            sketch = factory()
            sketch.consume_stream(stream_id(seed, n, rep), n)
            estimates[rep] = _estimate_value(sketch)
        err = estimates / n - 1.0
        abs_err = np.abs(err)
        reports.append(
            TrialReport(
                n=n,
                replicates=replicates,
                mean_estimate=float(estimates.mean()),
                l1=float(abs_err.mean()),
                rrmse=float(math.sqrt(float((err**2).mean()))),
                q99=float(np.quantile(abs_err, 0.99)),
                theoretical_rrmse=theory,
            )
        )
    return reports


def memory_table(epsilons: Sequence[float], Ns: Sequence[int]) -> list[MemoryRow]:
    """Analytic bit costs (exact solve vs HyperLogLog model) per cell."""
    rows = []
    for epsilon in epsilons:
        for N in Ns:
            sbits = required_memory(epsilon, N)
            hbits = hll_memory_model(epsilon, N)
            rows.append(MemoryRow(float(epsilon), int(N), sbits, hbits, hbits / sbits))
    return rows


def invariance_report(reports: Sequence[TrialReport]) -> InvarianceSummary:
    """Summarize how scale-invariant a sweep's error curve is."""
    if len(reports) < 2:
        raise InvalidInput("need >= 2 reports")
    ns = [r.n for r in reports]
    if max(ns) < 100 * min(ns):
        raise InvalidInput("grid must span at least two decades of n")
    kept = [r for r in reports if r.n >= 100]
    if len(kept) < 2:
        raise InvalidInput("need >= 2 reports with n >= 100")
    rr = np.array([r.rrmse for r in kept])
    z_scores = tuple(
        (r.rrmse**2 / r.theoretical_rrmse**2 - 1.0) * math.sqrt(r.replicates / 2.0)
        for r in kept
    )
    return InvarianceSummary(
        ns=tuple(r.n for r in kept),
        max_min_ratio=float(rr.max() / rr.min()),
        z_scores=z_scores,
    )


def _fmt(x: float) -> str:
    return format(x, ".6g")


def write_reports_csv(reports: Sequence[TrialReport], out) -> None:
    """CSV rows `n,replicates,mean,l1,rrmse,q99,theory`."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(REPORT_HEADER)
    for r in reports:
        writer.writerow(
            [r.n, r.replicates, _fmt(r.mean_estimate), _fmt(r.l1), _fmt(r.rrmse),
             _fmt(r.q99), _fmt(r.theoretical_rrmse)]
        )


def write_memory_csv(rows: Sequence[MemoryRow], out) -> None:
    """CSV rows `epsilon,N,sbitmap_bits,hll_bits,ratio`."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(MEMORY_HEADER)
    for row in rows:
        writer.writerow(
            [_fmt(row.epsilon), row.N, row.sbitmap_bits, row.hll_bits, _fmt(row.ratio)]
        )


def write_comparison_csv(
    named_reports: Sequence[tuple[str, Sequence[TrialReport]]], out
) -> None:
    """Multi-sketch sweep as one CSV with a leading `sketch` column."""
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(COMPARISON_HEADER)
    for name, reports in named_reports:
        for r in reports:
            writer.writerow(
                [name, r.n, r.replicates, _fmt(r.mean_estimate), _fmt(r.l1),
                 _fmt(r.rrmse), _fmt(r.q99), _fmt(r.theoretical_rrmse)]
            )
