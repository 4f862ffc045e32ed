"""Capacity solver, rate schedule identities, and memory models."""

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sbitmap.dimensioning import (
    CapacityParams,
    approx_memory,
    build_rate_table,
    hll_memory_model,
    loglog_memory_model,
    required_memory,
    solve_capacity,
)
from sbitmap.errors import InvalidInput, NoSolution

# Anchor configurations used throughout the test suite; the C values
# were verified at bring-up against independent published dimensioning
# numbers (915.6, 373.7, 2026.55) and then pinned at full precision.
ANCHORS = [
    (4000, 2**20, 915.658612, 0.033),
    (1800, 2**20, 373.726005, 0.052),
    (8000, 10**6, 2026.435844, 0.022),
]


@pytest.mark.parametrize("m,N,C,eps", ANCHORS)
def test_capacity_anchors(m, N, C, eps):
    params = solve_capacity(m, N)
    assert params.C == pytest.approx(C, abs=1e-3)
    assert params.epsilon == pytest.approx(eps, abs=5e-4)
    assert params.m == m and params.N == N


def test_capacity_regression_values():
    # Full-precision pins so solver drift is caught even inside the
    # looser anchor tolerances.
    assert solve_capacity(30000, 10**6).C == pytest.approx(9431.690588, abs=1e-3)
    assert solve_capacity(1800, 2**20).b_max == 1613
    assert solve_capacity(4000, 2**20).b_max == 3542


def test_capacity_equation_residual():
    for m, N, _, _ in ANCHORS:
        p = solve_capacity(m, N)
        rhs = p.C / 2 + math.log1p(2 * N / p.C) / math.log1p(2 / (p.C - 1))
        assert abs(rhs - m) <= 1e-9 * m


def test_derived_fields_follow_definitions():
    p = solve_capacity(4000, 2**20)
    assert p.epsilon == pytest.approx((p.C - 1) ** -0.5, rel=1e-12)
    assert p.r == pytest.approx(1 - 2 / (p.C + 1), rel=1e-12)
    assert p.b_max == math.floor(p.m - p.C / 2)
    assert 0 < p.r < 1
    assert 1 <= p.b_max <= p.m


def test_schedule_reaches_the_promised_range():
    # At the real-valued truncation boundary m - C/2 the expectation
    # curve hits N exactly; the integer fill level floor(m - C/2) can
    # sit at most one geometric step below it.
    for m, N, _, _ in ANCHORS:
        p = solve_capacity(m, N)
        t_real = (p.C / 2) * (p.r ** -(m - p.C / 2) - 1)
        assert t_real == pytest.approx(N, rel=1e-9)
        t_floor = build_rate_table(p).t[p.b_max]
        assert N * p.r * (1 - 1e-9) <= t_floor <= N * (1 + 1e-9)


def test_solver_rejects_bad_inputs():
    with pytest.raises(InvalidInput):
        solve_capacity(7, 10**6)
    with pytest.raises(InvalidInput):
        solve_capacity(4000.5, 10**6)
    with pytest.raises(InvalidInput):
        solve_capacity(4000, 0)
    with pytest.raises(InvalidInput):
        solve_capacity(True, 10)


def test_infeasible_demand_reports_minimal_m():
    with pytest.raises(NoSolution) as exc:
        solve_capacity(19, 10**9)
    assert exc.value.min_feasible_m == 20
    # The reported minimum really is feasible.
    p = solve_capacity(20, 10**9)
    assert p.C > 1


def test_single_item_capacity():
    p = solve_capacity(8, 1)
    assert p.b_max == 1
    t1 = p.C / (p.C - 1)
    assert t1 >= 1


def test_rate_table_anchor_values():
    p = solve_capacity(1800, 2**20)
    rt = build_rate_table(p)
    assert rt.p[1] == pytest.approx((p.C - 1) / p.C, rel=1e-12)
    assert rt.t[1] == pytest.approx(p.C / (p.C - 1), rel=1e-12)
    assert rt.t[0] == 0.0
    assert rt.m == p.m


def test_rate_table_monotone_with_clamp():
    p = solve_capacity(1800, 2**20)
    rt = build_rate_table(p)
    b = p.b_max
    assert np.all(np.diff(rt.p[1 : b + 1]) < 0)
    assert np.all(rt.p[b:] == rt.p[b])
    assert np.all(rt.p[1:] > 0) and np.all(rt.p[1:] <= 1)
    assert np.all(np.isfinite(rt.p[1:]))


def test_unconditional_fill_probabilities():
    p = solve_capacity(4000, 2**20)
    rt = build_rate_table(p)
    k = np.arange(1, p.m + 1)
    expected = (1 - (k - 1) / p.m) * rt.p[1:]
    np.testing.assert_allclose(rt.q[1:], expected, rtol=1e-12)


def test_expectation_closed_form_matches_summation():
    for m, N, _, _ in ANCHORS:
        p = solve_capacity(m, N)
        rt = build_rate_table(p)
        b = np.arange(1, p.b_max + 1, dtype=np.float64)
        closed = (p.C / 2) * (p.r**-b - 1)
        np.testing.assert_allclose(rt.t[1 : p.b_max + 1], closed, rtol=1e-10)
        assert np.all(np.diff(rt.t[: p.b_max + 1]) > 0)


def test_variance_identity():
    # Partial sums of (1-q)/q^2 equal t^2/C at every fill level up to
    # the truncation point: the design that makes the error scale-free.
    for m, N, _, _ in ANCHORS:
        p = solve_capacity(m, N)
        rt = build_rate_table(p)
        var = np.cumsum((1 - rt.q[1:]) / rt.q[1:] ** 2)[: p.b_max]
        np.testing.assert_allclose(
            var, rt.t[1 : p.b_max + 1] ** 2 / p.C, rtol=1e-8
        )


def test_rate_table_arrays_are_frozen():
    rt = build_rate_table(solve_capacity(1800, 2**20))
    with pytest.raises(ValueError):
        rt.p[1] = 0.5


def test_capacity_params_validation():
    with pytest.raises(InvalidInput):
        CapacityParams(m=100, N=10, C=0.5, epsilon=1.0, r=0.5, b_max=10)
    with pytest.raises(InvalidInput):
        CapacityParams(m=100, N=10, C=50.0, epsilon=0.1428, r=1.5, b_max=10)
    with pytest.raises(InvalidInput):
        CapacityParams(m=100, N=10, C=50.0, epsilon=0.1428, r=0.96, b_max=0)


@pytest.mark.parametrize(
    "eps,N,expected,published",
    [
        (0.01, 10**6, 31520, 31520),
        (0.03, 10**3, 1129, 1130),
        (0.09, 10**7, 809, 810),
    ],
)
def test_required_memory_table(eps, N, expected, published):
    bits = required_memory(eps, N)
    assert bits == expected
    assert bits == pytest.approx(published, rel=0.02)


def test_required_memory_round_trip():
    # Solving the sized bitmap back must not lose precision; the ceil
    # on m can only tighten epsilon, by less than one percent.
    for eps in (0.01, 0.03, 0.09):
        for N in (10**3, 10**4, 10**5, 10**6, 10**7):
            back = solve_capacity(required_memory(eps, N), N)
            assert eps * 0.99 <= back.epsilon <= eps


def test_required_memory_monotone():
    assert required_memory(0.01, 10**6) > required_memory(0.02, 10**6)
    assert required_memory(0.03, 10**7) > required_memory(0.03, 10**5)


def test_memory_models_reject_bad_epsilon():
    for eps in (0.0, 1.0, -0.5, 2.0):
        with pytest.raises(InvalidInput):
            required_memory(eps, 10**6)
        with pytest.raises(InvalidInput):
            approx_memory(eps, 10**6)
        with pytest.raises(InvalidInput):
            hll_memory_model(eps, 10**6)


def test_approx_memory_values():
    # Closed form: half eps^-2 times (1 + log(1 + 2 N eps^2)).
    assert approx_memory(0.01, 10**6) == 31517
    assert approx_memory(0.09, 10**7) == 803
    assert approx_memory(0.01, 10**6) == math.ceil(
        0.5 * 10**4 * (1 + math.log(201))
    )


def test_approx_memory_degenerate_floor():
    # As N*eps^2 goes to zero the formula collapses to half eps^-2.
    bits = approx_memory(0.001, 1)
    assert bits >= 0.5 * 0.001**-2
    assert bits == pytest.approx(0.5 * 0.001**-2, rel=1e-5)


def test_approx_memory_tracks_exact_model():
    for eps in (0.01, 0.03, 0.09):
        for N in (10**3, 10**5, 10**7):
            if N * eps**2 < 1:
                continue
            exact = required_memory(eps, N)
            approx = approx_memory(eps, N)
            assert abs(approx - exact) <= 0.05 * exact


@pytest.mark.parametrize(
    "eps,N,expected",
    [(0.01, 10**3, 43264), (0.03, 10**5, 6009), (0.09, 10**4, 534)],
)
def test_hll_memory_model_table(eps, N, expected):
    assert hll_memory_model(eps, N) == expected


def test_register_model_bands():
    # alpha = k+1 on 2^(2^k) <= N < 2^(2^(k+1)): 4 below 2^16, 5 above.
    assert hll_memory_model(0.1, 2**8) == round(1.04**2 * 4 * 100)
    assert hll_memory_model(0.1, 2**16 - 1) == round(1.04**2 * 4 * 100)
    assert hll_memory_model(0.1, 2**16) == round(1.04**2 * 5 * 100)
    assert hll_memory_model(0.1, 2**32 - 1) == round(1.04**2 * 5 * 100)
    for N in (2**8 - 1, 2**32, 1):
        with pytest.raises(InvalidInput):
            hll_memory_model(0.1, N)


def test_loglog_needs_56_percent_more():
    for eps, N in [(0.01, 10**3), (0.03, 10**5)]:
        ratio = loglog_memory_model(eps, N) / hll_memory_model(eps, N)
        assert ratio == pytest.approx((1.30 / 1.04) ** 2, rel=1e-3)


@settings(max_examples=50, deadline=None)
@given(
    m=st.integers(64, 20000),
    N=st.integers(2, 2**40),
)
def test_solver_and_table_invariants_hold_everywhere(m, N):
    try:
        p = solve_capacity(m, N)
    except NoSolution as exc:
        assert exc.min_feasible_m > m
        return
    rhs = p.C / 2 + math.log1p(2 * N / p.C) / math.log1p(2 / (p.C - 1))
    assert abs(rhs - m) <= 1e-9 * m
    assert 0 < p.r < 1
    assert 1 <= p.b_max <= p.m
    rt = build_rate_table(p)
    assert np.all(rt.p[1:] > 0) and np.all(rt.p[1:] <= 1)
    assert np.all(np.diff(rt.p[1 : p.b_max + 1]) <= 0)
    closed = (p.C / 2) * (p.r ** -float(p.b_max) - 1)
    assert rt.t[p.b_max] == pytest.approx(closed, rel=1e-10)
