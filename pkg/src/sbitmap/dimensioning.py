"""Memory dimensioning and the sampling-rate schedule.

Everything here flows from one capacity equation linking the bitmap
size ``m``, the largest cardinality ``N`` the sketch must reach, and a
precision constant ``C``:

    m = C/2 + ln(1 + 2N/C) / ln(1 + 2/(C - 1))

The right-hand side is strictly increasing in C, so a feasible (m, N)
pins C down uniquely; bisection finds it. From C follow the theoretical
relative error (C-1)^(-1/2), the geometric ratio r = 1 - 2/(C+1), and
the schedule of sampling rates the sketch runs:

    p[k] = m/(m+1-k) * (1 + 1/C) * r^k      for k <= b_max,
    p[k] = p[b_max]                         beyond (clamped),
    q[k] = (1 - (k-1)/m) * p[k],
    t[b] = sum_{k<=b} 1/q[k],

where b_max = floor(m - C/2) is the last fill level the estimator
trusts. On 1 <= b <= b_max the waiting-time table has the closed form
t[b] = (C/2)(r^(-b) - 1), and t[b_max'] = N at the real-valued boundary
b' = m - C/2; both identities are exercised by the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from sbitmap.errors import InvalidInput, NoSolution

# Accuracy below (C-1)^(-1/2) = 1 means estimator noise exceeding the
# count itself; treat C <= _C_FLOOR as infeasible rather than produce a
# schedule whose answers are dominated by variance.
_C_FLOOR = 2.0


@dataclass(frozen=True)
class CapacityParams:
    """Solved dimensioning constants for one sketch family.

    m: bitmap size in bits
    N: largest cardinality the schedule supports
    C: precision constant (real, > 2)
    epsilon: theoretical relative root mean square error, (C-1)^(-1/2)
    r: geometric ratio of the rate schedule, 1 - 2/(C+1)
    b_max: truncation fill level, floor(m - C/2) (>= 1)
    """

    m: int
    N: int
    C: float
    epsilon: float
    r: float
    b_max: int

    def __post_init__(self):
        if self.m < 1 or self.N < 1:
            raise InvalidInput(f"m and N must be positive, got m={self.m}, N={self.N}")
        if not self.C > 1.0:
            raise InvalidInput(f"precision constant must exceed 1, got {self.C}")
        if not 0.0 < self.r < 1.0:
            raise InvalidInput(f"ratio out of (0,1): {self.r}")
        if not 1 <= self.b_max <= self.m:
            raise InvalidInput(f"truncation level out of range: {self.b_max}")


@dataclass(frozen=True)
class RateTable:
    """Materialized schedule vectors, shared read-only across sketches.

    p: sequential sampling rates, valid at indices 1..m (p[0] is nan)
    q: unconditional fill probabilities, valid at 1..m (q[0] is nan)
    t: expected waiting indices, valid at 0..m with t[0] = 0
    """

    p: np.ndarray
    q: np.ndarray
    t: np.ndarray

    @property
    def m(self) -> int:
        return len(self.t) - 1


def _rhs(C: float, N: int) -> float:
    return C / 2.0 + math.log1p(2.0 * N / C) / math.log1p(2.0 / (C - 1.0))


def _check_count(N, name="N"):
    if isinstance(N, bool) or not isinstance(N, (int, np.integer)):
        raise InvalidInput(f"{name} must be an integer, got {N!r}")
    if N < 1:
        raise InvalidInput(f"{name} must be >= 1, got {N}")
    return int(N)


def _check_epsilon(epsilon) -> float:
    epsilon = float(epsilon)
    if not 0.0 < epsilon < 1.0 or math.isnan(epsilon):
        raise InvalidInput(f"epsilon must lie in (0, 1), got {epsilon}")
    return epsilon


def solve_capacity(m, N) -> CapacityParams:
    """Solve the capacity equation for C given a bit budget and range.

    Bisection on C; the right-hand side is strictly increasing, so the
    root is unique. Raises NoSolution (carrying the minimal feasible m)
    when the budget cannot reach N at any usable precision, InvalidInput
    for m < 8 or N < 1.
    """
    if isinstance(m, bool) or not isinstance(m, (int, np.integer)):
        raise InvalidInput(f"m must be an integer, got {m!r}")
    if m < 8:
        raise InvalidInput(f"m must be >= 8 bits, got {m}")
    m = int(m)
    N = _check_count(N)

    lo = _C_FLOOR * (1.0 + 1e-12)
    if _rhs(lo, N) >= m:
        # At the C floor the equation already demands more than m bits.
        min_m = math.floor(1.0 + math.log1p(N) / math.log(3.0)) + 1
        raise NoSolution(
            f"m={m} bits cannot reach N={N}; need at least {min_m} bits",
            min_feasible_m=min_m,
        )
    hi = 2.0 * m  # rhs(2m) >= m from the C/2 term alone
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if _rhs(mid, N) < m:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * hi:
            break
    C = 0.5 * (lo + hi)
    assert abs(_rhs(C, N) - m) <= 1e-9 * m

    # The floor can only land at 0 when N=1 (real boundary below 1 iff
    # N < C/(C-1) < 2); keep one usable level so t[1] >= 1 = N holds.
    b_max = max(1, math.floor(m - C / 2.0))
    return CapacityParams(
        m=m,
        N=N,
        C=C,
        epsilon=(C - 1.0) ** -0.5,
        r=1.0 - 2.0 / (C + 1.0),
        b_max=b_max,
    )


def required_memory(epsilon, N) -> int:
    """Bits needed to count to N at the given relative error.

    Evaluates the capacity equation at C = 1 + epsilon^(-2) and rounds
    up to a whole bit.
    """
    epsilon = _check_epsilon(epsilon)
    N = _check_count(N)
    return math.ceil(_rhs(1.0 + epsilon**-2, N))


def approx_memory(epsilon, N) -> int:
    """Closed-form approximation of required_memory.

    m ~= (1/2) epsilon^(-2) (1 + ln(1 + 2 N epsilon^2)); agrees with the
    exact solve within 5% once N*epsilon^2 >= 1. The degenerate floor as
    N*epsilon^2 -> 0 is (1/2) epsilon^(-2).
    """
    epsilon = _check_epsilon(epsilon)
    N = _check_count(N)
    return math.ceil(0.5 * epsilon**-2 * (1.0 + math.log1p(2.0 * N * epsilon**2)))


def build_rate_table(params: CapacityParams) -> RateTable:
    """Materialize the p/q/t schedule for solved params.

    O(m) doubles; the arrays are frozen so one table can back any number
    of sketches with the same params.
    """
    m, C, r, b_max = params.m, params.C, params.r, params.b_max
    k = np.arange(1.0, m + 1.0)
    p = np.empty(m + 1)
    p[0] = np.nan
    p[1 : b_max + 1] = (
        m / (m + 1.0 - k[:b_max]) * (1.0 + 1.0 / C) * np.power(r, k[:b_max])
    )
    p[b_max + 1 :] = p[b_max]
    q = np.empty(m + 1)
    q[0] = np.nan
    q[1:] = (1.0 - (k - 1.0) / m) * p[1:]
    t = np.zeros(m + 1)
    np.cumsum(1.0 / q[1:], out=t[1:])
    for arr in (p, q, t):
        arr.flags.writeable = False
    return RateTable(p=p, q=q, t=t)


def _register_alpha(N: int) -> int:
    if 2**8 <= N < 2**16:
        return 4
    if 2**16 <= N < 2**32:
        return 5
    raise InvalidInput(f"N={N} outside the supported register-sizing bands [2^8, 2^32)")


def hll_memory_model(epsilon, N) -> int:
    """Analytic HyperLogLog memory cost in bits for a target error.

    1.04^2 * alpha * epsilon^(-2) rounded to the nearest bit, where
    alpha is the per-register bit width: 4 for 2^8 <= N < 2^16, 5 for
    2^16 <= N < 2^32. N outside those bands is rejected rather than
    extrapolated.
    """
    epsilon = _check_epsilon(epsilon)
    N = _check_count(N)
    return round(1.04**2 * _register_alpha(N) * epsilon**-2)


def loglog_memory_model(epsilon, N) -> int:
    """Analytic LogLog memory cost in bits (1.30^2 * alpha * epsilon^(-2))."""
    epsilon = _check_epsilon(epsilon)
    N = _check_count(N)
    return round(1.30**2 * _register_alpha(N) * epsilon**-2)
