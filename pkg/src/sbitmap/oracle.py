"""Hash-free ground truth for the fill-count process.

The fill count after t distinct arrivals is a non-stationary Markov
chain: from level l it steps to l+1 with probability q[l+1] and stays
otherwise. This module computes that law three independent ways, as an
exact dynamic program and two stochastic simulators (direct chain steps,
and waiting times between fills drawn as geometrics), so the sketch's
estimator can be checked against machine-precision truth instead of
against itself.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sbitmap.dimensioning import RateTable
from sbitmap.errors import InvalidInput, ResourceLimit

# Probabilities below this are flushed to zero in the DP to keep the
# active window narrow; total discarded mass stays far under the 1e-12
# conservation check.
_FLUSH = 1e-300

DEFAULT_CELL_BUDGET = 10**9


@dataclass(frozen=True)
class FillDistribution:
    """Exact law of the fill count after n distinct arrivals.

    probs: probability of each fill level 0..m (length m+1)
    n: number of distinct arrivals
    """

    probs: np.ndarray
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise InvalidInput(f"n must be >= 0, got {self.n}")
        total = float(self.probs.sum())
        if not abs(total - 1.0) <= 1e-12:
            raise InvalidInput(f"probabilities sum to {total}, not 1")
        if self.probs.min() < 0.0:
            raise InvalidInput("negative probability entry")


def _check_draws(n) -> int:
    if isinstance(n, bool) or n != int(n) or n < 0:
        raise InvalidInput(f"arrival count must be a whole number >= 0, got {n!r}")
    return int(n)


def exact_fill_distribution(
    n, rates: RateTable, cell_budget: int = DEFAULT_CELL_BUDGET
) -> FillDistribution:
    """Exact fill-count distribution after n distinct arrivals.

    Dynamic program over arrivals, O(n*m) cell updates; refuses with
    ResourceLimit when n*m exceeds cell_budget. Mass conservation is
    asserted to 1e-12 despite the underflow flush.
    """
    n = _check_draws(n)
    m = rates.m
    if n * m > cell_budget:
        raise ResourceLimit(
            f"n*m = {n * m:.3g} cell updates exceeds budget {cell_budget:.3g}"
        )
    # stay[l] = P(no fill | level l); the chain is absorbed at level m.
    stay = np.empty(m + 1)
    stay[:m] = 1.0 - rates.q[1:]
    stay[m] = 1.0
    gain = np.concatenate(([0.0], rates.q[1:]))
    probs = np.zeros(m + 1)
    probs[0] = 1.0
    lo = hi = 0
    for step in range(n):
        hi = min(hi + 1, m)
        win = slice(max(lo, 1), hi + 1)
        probs[win] = probs[win] * stay[win] + probs[win.start - 1 : hi] * gain[win]
        if lo == 0:
            probs[0] *= stay[0]
        while probs[lo] < _FLUSH and lo < hi:
            probs[lo] = 0.0
            lo += 1
        # Exact arithmetic conserves mass at every step (stay + gain
        # pairs sum to 1); periodically undo the float rounding drift so
        # million-step runs still meet the 1e-12 conservation bound.
        if step % 1024 == 1023:
            probs[lo : hi + 1] /= probs[lo : hi + 1].sum()
    probs.flags.writeable = False
    return FillDistribution(probs=probs, n=n)


def chain_simulate(n, rates: RateTable, rng: np.random.Generator, size=None):
    """Draw the fill count after n arrivals by stepping the chain.

    Returns one int when size is None, else an int64 array of
    independent draws (vectorized across draws, n sequential steps).
    """
    n = _check_draws(n)
    m = rates.m
    draws = 1 if size is None else int(size)
    # q indexed by target level, padded so level m absorbs.
    q_next = np.zeros(m + 2)
    q_next[1 : m + 1] = rates.q[1:]
    level = np.zeros(draws, dtype=np.int64)
    for _ in range(n):
        level += rng.random(draws) < q_next[level + 1]
    return int(level[0]) if size is None else level


def waiting_time_simulate(n, rates: RateTable, rng: np.random.Generator, size=None):
    """Draw the fill count via waiting times between fills.

    The gap between the (b-1)-th and b-th fill is geometric with
    success probability q[b], independently across b; the fill count
    after n arrivals is the largest b whose cumulative waiting time is
    within n. Distributionally identical to chain_simulate.
    """
    n = _check_draws(n)
    m = rates.m
    draws = 1 if size is None else int(size)
    total = np.zeros(draws, dtype=np.int64)
    level = np.zeros(draws, dtype=np.int64)
    for b in range(1, m + 1):
        total += rng.geometric(rates.q[b], size=draws)
        alive = total <= n
        if not alive.any():
            break
        level += alive
    return int(level[0]) if size is None else level


def estimate_moments(
    dist: FillDistribution, rates: RateTable, b_max: int
) -> tuple[float, float]:
    """Mean and variance of the truncated estimate t[min(L, b_max)].

    Evaluates exactly what the sketch's estimator ships (lookup then
    clamp), so deviations from theory surface here rather than hiding
    behind untruncated algebra.
    """
    levels = np.minimum(np.arange(len(dist.probs)), b_max)
    values = rates.t[levels]
    mean = float(values @ dist.probs)
    var = float(((values - mean) ** 2) @ dist.probs)
    return mean, var


def truncation_mass(dist: FillDistribution, b_max: int) -> float:
    """Probability that the fill count exceeds the truncation level."""
    return float(dist.probs[b_max + 1 :].sum())
