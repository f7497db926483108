"""Exact offline solver and its brute-force oracle."""

from __future__ import annotations

from itertools import product

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aoisched import (
    ChannelTrace,
    ResourceBudgetError,
    brute_force_opt,
    decision_key,
    ma_csit_decide,
    opt_exact,
    policy_cost,
    replay,
    schedule_cost,
)

from conftest import random_trace


def exhaustive_minimum(trace, initial_ages=None):
    """Third, fully independent oracle: evaluate every (n+1)^T schedule.

    Unlike ``brute_force_opt`` it takes no shortcuts at all, so it also
    witnesses that those shortcuts never change the answer.
    """
    n = trace.num_users
    best = None
    for raw in product([None, *range(n)], repeat=trace.horizon):
        cost = schedule_cost(trace, raw, initial_ages)
        key = (cost, tuple(decision_key(d) for d in raw))
        if best is None or key < best[0]:
            best = (key, raw)
    return best[0][0], best[1]


# ---------------------------------------------------------------------------
# Frozen hand-worked examples
# ---------------------------------------------------------------------------


def test_exact_frozen_example(tiny_trace):
    result = opt_exact(tiny_trace)
    assert result.cost == 11
    assert result.schedule == (0, 1, 0, None)
    assert schedule_cost(tiny_trace, result.schedule) == 11


def test_exact_single_slot_prefers_idle():
    # Serving in the last slot cannot reduce any counted age, so the
    # lexicographically-first optimum idles.
    result = opt_exact(ChannelTrace(2, 1, ("GB",)))
    assert (result.cost, result.schedule) == (2, (None,))


def test_exact_single_user():
    result = opt_exact(ChannelTrace(1, 3, ("G", "G", "G")))
    assert result.cost == 3
    assert result.schedule == (0, 0, None)


def test_exact_all_bad_is_pure_growth():
    result = opt_exact(ChannelTrace(2, 3, ("BB", "BB", "BB")))
    assert result.cost == 12
    assert result.schedule == (None, None, None)


def test_exact_empty_horizon():
    result = opt_exact(ChannelTrace(2, 0, ()))
    assert (result.cost, result.schedule) == (0, ())


def test_exact_respects_initial_ages():
    trace = ChannelTrace(2, 2, ("GG", "BB"))
    # ages (4, 2): serve the old user, pay 6 then 1 + 3
    result = opt_exact(trace, initial_ages=(4, 2))
    assert result.cost == 10
    assert result.schedule == (0, None)


# ---------------------------------------------------------------------------
# Oracle agreement
# ---------------------------------------------------------------------------


@given(st.integers(0, 2**32 - 1), st.integers(1, 2), st.integers(0, 5))
def test_brute_force_matches_full_enumeration(seed, num_users, horizon):
    trace = random_trace(num_users, horizon, seed)
    cost, schedule = exhaustive_minimum(trace)
    brute = brute_force_opt(trace)
    assert brute.cost == cost
    assert brute.schedule == schedule


def test_brute_force_matches_full_enumeration_three_users():
    for seed in range(25):
        trace = random_trace(3, 4, seed)
        cost, schedule = exhaustive_minimum(trace)
        brute = brute_force_opt(trace)
        assert (brute.cost, brute.schedule) == (cost, schedule)


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(0, 7))
def test_exact_matches_brute_force(seed, num_users, horizon):
    trace = random_trace(num_users, horizon, seed)
    brute = brute_force_opt(trace)
    exact = opt_exact(trace)
    assert exact.cost == brute.cost
    assert exact.schedule == brute.schedule


@given(
    st.integers(0, 2**32 - 1),
    st.lists(st.integers(1, 6), min_size=2, max_size=2),
)
def test_exact_matches_brute_force_uneven_start(seed, ages):
    trace = random_trace(2, 6, seed)
    ages = tuple(ages)
    brute = brute_force_opt(trace, ages)
    exact = opt_exact(trace, ages)
    assert exact.cost == brute.cost
    assert exact.schedule == brute.schedule


# ---------------------------------------------------------------------------
# Structural properties of the optimum
# ---------------------------------------------------------------------------


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 10))
def test_exact_never_exceeds_any_policy(seed, num_users, horizon):
    trace = random_trace(num_users, horizon, seed)
    opt = opt_exact(trace)
    assert schedule_cost(trace, opt.schedule) == opt.cost
    assert opt.cost <= policy_cost(trace, ma_csit_decide)
    # every slot costs at least one unit of age per user
    assert opt.cost >= num_users * horizon


@given(st.integers(0, 2**32 - 1), st.integers(1, 8))
def test_exact_schedule_never_serves_bad_channel(seed, horizon):
    trace = random_trace(2, horizon, seed)
    opt = opt_exact(trace)
    for slot, decision in enumerate(opt.schedule, start=1):
        if decision is not None:
            assert trace.is_good(slot, decision)


@given(st.integers(0, 2**32 - 1), st.integers(1, 7))
def test_appending_blocked_slot_shifts_optimum_predictably(seed, horizon):
    # Adding an all-Bad slot after the horizon adds the final ages of some
    # run to the cost.  The cheapest possible final row sums to n (all ages
    # reset), the worst to the previous optimum's own final ages.
    trace = random_trace(2, horizon, seed)
    extended = ChannelTrace(2, horizon + 1, trace.rows + ("BB",))
    base = opt_exact(trace)
    ext = opt_exact(extended)
    final = replay(trace, base.schedule).final_ages()
    assert base.cost + extended.num_users <= ext.cost <= base.cost + sum(final)


def test_exact_node_budget_enforced():
    trace = random_trace(3, 12, seed=5)
    with pytest.raises(ResourceBudgetError):
        opt_exact(trace, node_budget=3)


def test_brute_force_sequence_budget_enforced():
    trace = random_trace(2, 20, seed=5)
    with pytest.raises(ResourceBudgetError):
        brute_force_opt(trace, max_sequences=1000)


def test_exact_reports_node_count():
    result = opt_exact(random_trace(2, 8, seed=3))
    assert 0 < result.nodes <= 2_000_000
