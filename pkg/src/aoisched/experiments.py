"""Reproducible experiments: ratio sweeps, stochastic comparisons, invariant suite.

Everything here is deterministic for a given configuration: trace generation
is counter-based, means are computed in exact arithmetic and converted to
float once, and CSV cells are formatted with ``repr`` so repeated runs
produce byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .analysis import (
    check_interval_bounds,
    check_max_user_gap_constant,
    check_other_user_age_bound,
    check_sub_min_user_age,
    decompose_intervals,
    ratio_report,
)
from .channels import gen_adversarial_2user, gen_adversarial_3user, gen_iid
from .core import ChannelTrace, SimTrace, policy_cost, replay, simulate
from .errors import IntegrityError, ParameterError
from .optsolver import opt_exact
from .policies import ma_csit_decide, max_age_decide

# ---------------------------------------------------------------------------
# CSV output
# ---------------------------------------------------------------------------


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Fraction):
        return repr(float(value))
    return str(value)


def write_csv(path, fieldnames: Sequence[str], rows: Sequence[dict]) -> None:
    """Write rows with deterministic cell formatting (floats via ``repr``)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(row.get(k)) for k in fieldnames})


# ---------------------------------------------------------------------------
# worst-case construction sweeps
# ---------------------------------------------------------------------------

SWEEP2_FIELDS = (
    "num_users",
    "delta",
    "periods",
    "horizon",
    "cost_policy",
    "cost_opt",
    "ratio",
    "bound",
    "violations",
    "warnings",
)
SWEEP3_FIELDS = SWEEP2_FIELDS


def _sweep(
    gen,
    num_users: int,
    deltas: Sequence[int],
    periods: int,
    node_budget: int,
) -> list[dict]:
    rows = []
    for delta in deltas:
        trace = gen(delta, periods)
        report = ratio_report(trace, node_budget=node_budget)
        rows.append(
            {
                "num_users": num_users,
                "delta": delta,
                "periods": periods,
                "horizon": trace.horizon,
                "cost_policy": report.cost_policy,
                "cost_opt": report.cost_opt,
                "ratio": float(report.ratio),
                "bound": float(report.bound),
                "violations": len(report.violations),
                "warnings": len(report.warnings),
            }
        )
    return rows


def sweep_two_user(
    deltas: Sequence[int] = (8, 16, 32, 64, 128),
    periods: int = 20,
    node_budget: int = 2_000_000,
) -> list[dict]:
    """Cost ratio of the two-user construction as its period grows."""
    return _sweep(gen_adversarial_2user, 2, deltas, periods, node_budget)


def sweep_three_user(
    deltas: Sequence[int] = (24, 48, 96, 192, 384),
    periods: int = 20,
    node_budget: int = 2_000_000,
) -> list[dict]:
    """Cost ratio of the three-user construction as its period grows."""
    return _sweep(gen_adversarial_3user, 3, deltas, periods, node_budget)


# ---------------------------------------------------------------------------
# stochastic policy comparison
# ---------------------------------------------------------------------------

STOCHASTIC_ROW_FIELDS = (
    "p",
    "seed",
    "cost_csit",
    "cost_oblivious",
    "avg_age_csit",
    "avg_age_oblivious",
    "ratio",
)
STOCHASTIC_SUMMARY_FIELDS = (
    "p",
    "seeds",
    "mean_avg_age_csit",
    "mean_avg_age_oblivious",
    "mean_ratio",
)


def _oblivious(ages, _row):
    return max_age_decide(ages)


def stochastic_compare(
    ps: Sequence[float] = (0.1, 0.3, 0.5),
    num_users: int = 3,
    horizon: int = 10_000,
    num_seeds: int = 50,
    seed0: int = 1,
) -> tuple[list[dict], list[dict]]:
    """Channel-aware vs. channel-oblivious max-age on i.i.d. channels.

    Returns (per-run rows, per-probability summaries), rows sorted by
    (p, seed).  Ratios are oblivious over channel-aware cost; means are exact
    fractions converted to float once.
    """
    if num_seeds < 1:
        raise ParameterError(f"need at least one seed, got {num_seeds}")
    if horizon < 1:
        raise ParameterError(f"need at least one slot, got {horizon}")
    rows: list[dict] = []
    summaries: list[dict] = []
    for p in sorted(set(float(p) for p in ps)):
        sum_avg_c = Fraction(0)
        sum_avg_o = Fraction(0)
        sum_ratio = Fraction(0)
        for k in range(num_seeds):
            seed = seed0 + k
            trace = gen_iid(p, num_users, horizon, seed)
            cost_c = policy_cost(trace, ma_csit_decide)
            cost_o = policy_cost(trace, _oblivious)
            avg_c = Fraction(cost_c, horizon * num_users)
            avg_o = Fraction(cost_o, horizon * num_users)
            ratio = Fraction(cost_o, cost_c)
            sum_avg_c += avg_c
            sum_avg_o += avg_o
            sum_ratio += ratio
            rows.append(
                {
                    "p": p,
                    "seed": seed,
                    "cost_csit": cost_c,
                    "cost_oblivious": cost_o,
                    "avg_age_csit": float(avg_c),
                    "avg_age_oblivious": float(avg_o),
                    "ratio": float(ratio),
                }
            )
        summaries.append(
            {
                "p": p,
                "seeds": num_seeds,
                "mean_avg_age_csit": float(sum_avg_c / num_seeds),
                "mean_avg_age_oblivious": float(sum_avg_o / num_seeds),
                "mean_ratio": float(sum_ratio / num_seeds),
            }
        )
    return rows, summaries


# ---------------------------------------------------------------------------
# invariant suite
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SuiteConfig:
    two_user_traces: int = 1000
    two_user_horizon: int = 50
    three_user_traces: int = 100
    three_user_horizon: int = 36
    good_probability: float = 0.5
    seed: int = 1
    two_user_deltas: tuple[int, ...] = (8, 16, 32)
    two_user_periods: int = 3
    three_user_deltas: tuple[int, ...] = (24, 48)
    three_user_periods: int = 2
    node_budget: int = 2_000_000


@dataclass(frozen=True)
class SuiteResult:
    traces_checked: int
    violations: tuple[str, ...]      #: formatted "label: check detail" strings
    warnings: tuple[str, ...]
    counts: dict                     #: violation tally by check name
    max_ratio: Fraction
    max_ratio_label: str


def _with_record(sim: SimTrace, slot: int, **changes) -> SimTrace:
    """Copy of a run with one slot record altered (for checker self-tests)."""
    records = list(sim.records)
    records[slot - 1] = dataclasses.replace(records[slot - 1], **changes)
    return dataclasses.replace(sim, records=tuple(records))


def checker_sensitivity_selftest() -> None:
    """Prove the checkers can actually fire before trusting their silence.

    Runs each checker against deliberately corrupted run data and raises
    IntegrityError if any fails to flag it (or flags pristine data).
    """
    # Two users, one interval of length 2 then a short tail.
    trace2 = ChannelTrace(2, 3, ("BB", "GB", "BG"))
    sim2 = simulate(trace2, ma_csit_decide)
    opt2 = replay(trace2, opt_exact(trace2).schedule)
    iv2 = decompose_intervals(sim2)
    if check_max_user_gap_constant(sim2, opt2, iv2):
        raise IntegrityError("self-test: gap checker fired on pristine data")
    if check_other_user_age_bound(sim2, opt2, iv2):
        raise IntegrityError("self-test: age-bound checker fired on pristine data")
    base = check_interval_bounds(sim2, opt2, iv2)
    if base.violations:
        raise IntegrityError("self-test: bound checker fired on pristine data")

    # Shift the oldest user's reference age mid-interval: gap not constant.
    u = iv2[0].max_age_user
    ages = list(opt2.records[1].pre_ages)
    ages[u] += 5
    corrupt = _with_record(opt2, 2, pre_ages=tuple(ages))
    if not check_max_user_gap_constant(sim2, corrupt, iv2):
        raise IntegrityError("self-test: gap checker missed corrupted data")

    # Sink the other user's reference age below the policy's.
    v = 1 - u
    ages = list(opt2.records[0].pre_ages)
    ages[v] = 0
    corrupt = _with_record(opt2, 1, pre_ages=tuple(ages))
    if not check_other_user_age_bound(sim2, corrupt, iv2):
        raise IntegrityError("self-test: age-bound checker missed corrupted data")

    # Inflate the policy's cost past its allowance; deflate the reference cost
    # below its floor.
    corrupt = _with_record(sim2, 2, slot_cost=10_000)
    rep = check_interval_bounds(corrupt, opt2, iv2)
    if not any(x.check == "interval_upper_bound" for x in rep.violations):
        raise IntegrityError("self-test: upper-bound checker missed corrupted data")
    corrupt = _with_record(opt2, 2, slot_cost=0)
    corrupt = _with_record(corrupt, 1, slot_cost=0)
    rep = check_interval_bounds(sim2, corrupt, iv2)
    if not any(x.check == "interval_lower_bound" for x in rep.violations):
        raise IntegrityError("self-test: lower-bound checker missed corrupted data")

    # Three users: the sub-interval check must catch a sunken youngest age.
    trace3 = ChannelTrace(3, 2, ("BBB", "GGG"))
    sim3 = simulate(trace3, ma_csit_decide)
    opt3 = replay(trace3, opt_exact(trace3).schedule)
    iv3 = decompose_intervals(sim3)
    if check_sub_min_user_age(sim3, opt3, iv3):
        raise IntegrityError("self-test: sub-interval checker fired on pristine data")
    y = 3 - iv3[0].max_age_user - iv3[0].sub_intervals[0].second_user
    ages = list(opt3.records[1].pre_ages)
    ages[y] = 0
    corrupt = _with_record(opt3, 2, pre_ages=tuple(ages))
    if not check_sub_min_user_age(sim3, corrupt, iv3):
        raise IntegrityError("self-test: sub-interval checker missed corrupted data")

    # Run validation must reject a run produced by a different policy.
    oblivious_run = simulate(ChannelTrace(2, 2, ("BB", "BB")), _oblivious)
    try:
        decompose_intervals(oblivious_run)
    except IntegrityError:
        pass
    else:
        raise IntegrityError("self-test: run validation accepted a non-policy run")


def run_invariant_suite(config: SuiteConfig = SuiteConfig()) -> SuiteResult:
    """Check every interval inequality over random traces and constructions.

    Starts with ``checker_sensitivity_selftest`` so a silently broken checker
    cannot produce a hollow clean result.
    """
    checker_sensitivity_selftest()
    violations: list[str] = []
    warnings: list[str] = []
    counts: dict = {}
    checked = 0
    max_ratio = Fraction(0)
    max_label = ""

    def run_one(label: str, trace: ChannelTrace) -> None:
        nonlocal checked, max_ratio, max_label
        report = ratio_report(trace, node_budget=config.node_budget)
        checked += 1
        if report.ratio > max_ratio:
            max_ratio = report.ratio
            max_label = label
        for v in report.violations:
            counts[v.check] = counts.get(v.check, 0) + 1
            violations.append(f"{label}: {v.check} {v.detail}")
        for w in report.warnings:
            warnings.append(f"{label}: {w.check} {w.detail}")

    for k in range(config.two_user_traces):
        seed = config.seed + k
        trace = gen_iid(config.good_probability, 2, config.two_user_horizon, seed)
        run_one(f"iid(users=2,T={config.two_user_horizon},seed={seed})", trace)
    for k in range(config.three_user_traces):
        seed = config.seed + 100_000 + k
        trace = gen_iid(config.good_probability, 3, config.three_user_horizon, seed)
        run_one(f"iid(users=3,T={config.three_user_horizon},seed={seed})", trace)
    for delta in config.two_user_deltas:
        trace = gen_adversarial_2user(delta, config.two_user_periods)
        run_one(f"construction(users=2,delta={delta})", trace)
    for delta in config.three_user_deltas:
        trace = gen_adversarial_3user(delta, config.three_user_periods)
        run_one(f"construction(users=3,delta={delta})", trace)

    return SuiteResult(
        traces_checked=checked,
        violations=tuple(violations),
        warnings=tuple(warnings),
        counts=counts,
        max_ratio=max_ratio,
        max_ratio_label=max_label,
    )
