"""Interval decomposition of channel-aware max-age runs, and exactness checks.

A run of the channel-aware max-age policy splits into *intervals*: a new
interval starts whenever the previous one ended, and an interval ends at the
slot where the policy successfully serves the currently oldest user (lowest
index on age ties).  Within an interval the oldest user's identity is
invariant — they can only lose the title by being served, which is exactly
the event that closes the interval — and their channel is Bad at every slot
except the last, since the policy would otherwise have served them earlier.

For three users, each interval further splits into *sub-intervals* keyed the
same way to the second-oldest user: a sub-interval ends when that user is
successfully served, and the last one ends with the interval.

Every interval carries a *residue*: the number of slots between the last
successful service of its oldest user and the interval's start.  Users never
served yet count from the virtual service implied by their initial age, so a
run starting from all-ones ages has residue 0 for its first interval.

The checkers compare the policy run against an exact offline optimum run on
the same channel realization and report violations of per-interval
inequalities that bound the policy's cost from above and the optimum's cost
from below.  All arithmetic is exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .core import AgeVector, ChannelTrace, Schedule, SimTrace, replay, simulate
from .errors import (
    ConfigurationError,
    IntegrityError,
    ParameterError,
    ScopeError,
)
from .optsolver import opt_exact
from .policies import ma_csit_decide

# ---------------------------------------------------------------------------
# data model
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubInterval:
    """One sub-interval of a three-user interval (1-based ``index`` within it)."""

    index: int
    start_slot: int
    length: int
    second_user: int    #: the second-oldest user this sub-interval tracks
    sub_residue: int    #: slots since that user's previous successful service

    @property
    def end_slot(self) -> int:
        return self.start_slot + self.length - 1


@dataclass(frozen=True)
class Interval:
    """One interval of a policy run (1-based ``index`` within the run)."""

    index: int
    start_slot: int
    length: int
    max_age_user: int        #: the oldest user throughout this interval
    residue: int             #: slots since that user's previous successful service
    complete: bool           #: ended by serving the oldest user (vs. horizon ran out)
    sub_intervals: tuple[SubInterval, ...] = ()
    case: Optional[int] = None       #: residue class vs. previous lengths (intervals >= 2)
    split_a: Optional[int] = None    #: case-1 residue split: carried-over sub residue
    split_b: Optional[int] = None    #: case-1 residue split: carried-over sub length
    next_residue: Optional[int] = None  #: residue the following interval starts with

    @property
    def end_slot(self) -> int:
        return self.start_slot + self.length - 1


@dataclass(frozen=True)
class Violation:
    """A failed check: which one, where, and the numbers behind it."""

    check: str
    interval: Optional[int]
    slot: Optional[int]
    detail: str


@dataclass(frozen=True)
class IntervalCheck:
    """Exact slack of the two per-interval cost inequalities (>= 0 expected)."""

    interval: int
    cost_policy: int    #: policy cost accrued during the interval
    cost_opt: int       #: optimum's cost accrued during the same slots
    upper_slack: int    #: residue-weighted upper bound minus policy cost
    lower_slack: int    #: optimum cost minus its closed-form lower bound


@dataclass(frozen=True)
class InequalityReport:
    checks: tuple[IntervalCheck, ...]
    violations: tuple[Violation, ...]
    warnings: tuple[Violation, ...]


@dataclass(frozen=True)
class RatioReport:
    """Full comparison of the channel-aware max-age policy against the optimum."""

    num_users: int
    horizon: int
    initial_ages: AgeVector
    cost_policy: int
    cost_opt: int
    ratio: Fraction
    bound: Optional[Fraction]
    within_bound: Optional[bool]
    opt_schedule: Schedule
    intervals: tuple[Interval, ...]
    checks: tuple[IntervalCheck, ...] = ()
    violations: tuple[Violation, ...] = ()
    warnings: tuple[Violation, ...] = ()

    def to_json(self) -> dict:
        """JSON-ready dict with stable field names and exact integer content."""
        by_index = {c.interval: c for c in self.checks}
        intervals = []
        for iv in self.intervals:
            entry: dict = {
                "index": iv.index,
                "start": iv.start_slot,
                "I": iv.length,
                "l": iv.residue,
                "user": iv.max_age_user,
                "complete": iv.complete,
                "case": iv.case,
                "split": (
                    [iv.split_a, iv.split_b] if iv.split_a is not None else None
                ),
                "next_l": iv.next_residue,
                "sub": [
                    {
                        "index": s.index,
                        "start": s.start_slot,
                        "I": s.length,
                        "l": s.sub_residue,
                        "user": s.second_user,
                    }
                    for s in iv.sub_intervals
                ],
            }
            chk = by_index.get(iv.index)
            entry["slacks"] = (
                {
                    "cost_policy": chk.cost_policy,
                    "cost_opt": chk.cost_opt,
                    "upper": chk.upper_slack,
                    "lower": chk.lower_slack,
                }
                if chk
                else None
            )
            intervals.append(entry)
        return {
            "num_users": self.num_users,
            "horizon": self.horizon,
            "initial_ages": list(self.initial_ages),
            "cost_policy": self.cost_policy,
            "cost_opt": self.cost_opt,
            "ratio": float(self.ratio),
            "ratio_exact": [self.ratio.numerator, self.ratio.denominator],
            "bound": None if self.bound is None else float(self.bound),
            "within_bound": self.within_bound,
            "intervals": intervals,
            "violations": [_violation_json(v) for v in self.violations],
            "warnings": [_violation_json(v) for v in self.warnings],
        }


def _violation_json(v: Violation) -> dict:
    return {
        "check": v.check,
        "interval": v.interval,
        "slot": v.slot,
        "detail": v.detail,
    }


# ---------------------------------------------------------------------------
# run validation and decomposition
# ---------------------------------------------------------------------------


def ensure_ma_run(sim: SimTrace) -> None:
    """Verify that ``sim`` is a faithful channel-aware max-age run.

    Recomputes the whole age chain and every decision; raises IntegrityError
    naming the first inconsistent slot.
    """
    ages = sim.initial_ages
    for rec in sim.records:
        if rec.pre_ages != ages:
            raise IntegrityError(
                f"slot {rec.slot}: recorded ages {rec.pre_ages} do not follow "
                f"from the run's history (expected {ages})"
            )
        row = sim.channel.rows[rec.slot - 1]
        want = ma_csit_decide(rec.pre_ages, row)
        if rec.decision != want:
            raise IntegrityError(
                f"slot {rec.slot}: decision {rec.decision!r} is not the "
                f"channel-aware max-age choice {want!r}"
            )
        succeeded = want is not None and row[want] == "G"
        if rec.success != succeeded:
            raise IntegrityError(
                f"slot {rec.slot}: success flag {rec.success} inconsistent "
                f"with the channel"
            )
        ages = tuple(
            1 if (rec.success and u == rec.decision) else a + 1
            for u, a in enumerate(ages)
        )


def _argmax_lowest(ages: Sequence[int], exclude: Optional[int] = None) -> int:
    """Index of the maximum age; lowest index on ties; optionally skip one user."""
    best = -1
    best_age = -1
    for u, a in enumerate(ages):
        if u == exclude:
            continue
        if a > best_age:
            best, best_age = u, a
    return best


def classify_residue_case(residue: int, prev_length: int, prev2_length: int) -> int:
    """Residue class of an interval relative to the two preceding lengths.

    1 — the residue fits inside the previous interval;
    2 — it reaches into the one before;
    3 — it reaches past both.
    For the second interval of a run there is no second-previous length:
    pass 0, which makes class 2 unreachable.
    """
    if residue < 0 or prev_length < 0 or prev2_length < 0:
        raise ParameterError("residue and lengths must be nonnegative")
    if residue <= prev_length:
        return 1
    if residue >= prev_length + prev2_length:
        return 3
    return 2


def decompose_intervals(sim: SimTrace) -> tuple[Interval, ...]:
    """Split a channel-aware max-age run into its intervals (and sub-intervals).

    The input is validated first (see ``ensure_ma_run``).  Structural facts
    that must hold for any faithful run — the oldest user not changing
    mid-interval, consecutive residues agreeing across interval boundaries —
    are re-checked and raise IntegrityError if broken.
    """
    ensure_ma_run(sim)
    n = sim.channel.num_users
    horizon = sim.channel.horizon
    if horizon == 0:
        return ()

    last = [1 - a for a in sim.initial_ages]  # last successful service per user
    intervals: list[Interval] = []
    lengths: list[int] = []
    pending_next: Optional[int] = None

    interval_start = 1
    u_m = -1
    residue = 0
    subs: list[SubInterval] = []
    sub_start = 1
    x_user = -1
    sub_residue = 0

    def close_interval(end_slot: int, complete: bool) -> None:
        nonlocal pending_next
        index = len(intervals) + 1
        length = end_slot - interval_start + 1
        next_res: Optional[int] = None
        if complete:
            if end_slot < horizon:
                following_ages = sim.records[end_slot].pre_ages
            else:
                following_ages = sim.final_ages()
            u_next = _argmax_lowest(following_ages)
            next_res = end_slot - last[u_next]
        case = None
        if index >= 2:
            prev1 = lengths[-1]
            prev2 = lengths[-2] if index >= 3 else 0
            case = classify_residue_case(residue, prev1, prev2)
        split_a = split_b = None
        if n == 3 and index >= 2 and intervals[-1].sub_intervals:
            carried = intervals[-1].sub_intervals[-1]
            if carried.sub_residue + carried.length != residue:
                raise IntegrityError(
                    f"interval {index}: residue {residue} does not equal the "
                    f"carried-over sub-interval residue {carried.sub_residue} "
                    f"plus length {carried.length}"
                )
            if case == 1:
                split_a, split_b = carried.sub_residue, carried.length
        intervals.append(
            Interval(
                index=index,
                start_slot=interval_start,
                length=length,
                max_age_user=u_m,
                residue=residue,
                complete=complete,
                sub_intervals=tuple(subs),
                case=case,
                split_a=split_a,
                split_b=split_b,
                next_residue=next_res,
            )
        )
        lengths.append(length)
        pending_next = next_res

    for rec in sim.records:
        t = rec.slot
        if t == interval_start:
            u_m = _argmax_lowest(rec.pre_ages)
            residue = interval_start - 1 - last[u_m]
            if pending_next is not None and residue != pending_next:
                raise IntegrityError(
                    f"interval starting at slot {t}: residue {residue} differs "
                    f"from the {pending_next} implied by the previous interval"
                )
            subs = []
            sub_start = t
        elif _argmax_lowest(rec.pre_ages) != u_m:
            raise IntegrityError(f"slot {t}: oldest user changed mid-interval")
        if n == 3:
            if t == sub_start:
                x_user = _argmax_lowest(rec.pre_ages, exclude=u_m)
                sub_residue = sub_start - 1 - last[x_user]
            elif _argmax_lowest(rec.pre_ages, exclude=u_m) != x_user:
                raise IntegrityError(
                    f"slot {t}: second-oldest user changed mid-sub-interval"
                )
        interval_ends = rec.success and rec.decision == u_m
        sub_ends = n == 3 and (
            interval_ends or (rec.success and rec.decision == x_user)
        )
        if rec.success:
            last[rec.decision] = t
        if sub_ends:
            subs.append(
                SubInterval(
                    index=len(subs) + 1,
                    start_slot=sub_start,
                    length=t - sub_start + 1,
                    second_user=x_user,
                    sub_residue=sub_residue,
                )
            )
            sub_start = t + 1
        if interval_ends:
            close_interval(t, True)
            interval_start = t + 1

    if interval_start <= horizon:
        if n == 3 and sub_start <= horizon:
            subs.append(
                SubInterval(
                    index=len(subs) + 1,
                    start_slot=sub_start,
                    length=horizon - sub_start + 1,
                    second_user=x_user,
                    sub_residue=sub_residue,
                )
            )
        close_interval(horizon, False)
    return tuple(intervals)


# ---------------------------------------------------------------------------
# per-slot age comparisons against the optimum's run
# ---------------------------------------------------------------------------


def _ensure_same_setup(sim: SimTrace, opt_sim: SimTrace) -> None:
    if sim.channel != opt_sim.channel:
        raise ConfigurationError("runs to compare use different channel traces")
    if sim.initial_ages != opt_sim.initial_ages:
        raise ConfigurationError("runs to compare use different initial ages")


def check_max_user_gap_constant(
    sim: SimTrace,
    opt_sim: SimTrace,
    intervals: Optional[tuple[Interval, ...]] = None,
) -> list[Violation]:
    """Within each interval, (policy age - reference age) of the oldest user is constant.

    Holds because that user's channel is Bad at every slot of the interval
    except the last, so neither schedule can reset them in between.
    """
    _ensure_same_setup(sim, opt_sim)
    if intervals is None:
        intervals = decompose_intervals(sim)
    violations = []
    for iv in intervals:
        u = iv.max_age_user
        gap0 = (
            sim.records[iv.start_slot - 1].pre_ages[u]
            - opt_sim.records[iv.start_slot - 1].pre_ages[u]
        )
        for t in range(iv.start_slot + 1, iv.end_slot + 1):
            gap = sim.records[t - 1].pre_ages[u] - opt_sim.records[t - 1].pre_ages[u]
            if gap != gap0:
                violations.append(
                    Violation(
                        check="max_user_gap",
                        interval=iv.index,
                        slot=t,
                        detail=(
                            f"user {u} age gap {gap} differs from {gap0} at the "
                            f"interval start"
                        ),
                    )
                )
                break
    return violations


def check_other_user_age_bound(
    sim: SimTrace,
    opt_sim: SimTrace,
    intervals: Optional[tuple[Interval, ...]] = None,
) -> list[Violation]:
    """Two users: within each interval the non-oldest user is never older under
    the policy than under the reference schedule.

    Holds because the policy serves that user at every slot of the interval
    where their channel is Good, which no schedule can beat.
    """
    _ensure_same_setup(sim, opt_sim)
    if sim.channel.num_users != 2:
        raise ScopeError("the other-user age bound is defined for exactly 2 users")
    if intervals is None:
        intervals = decompose_intervals(sim)
    violations = []
    for iv in intervals:
        v = 1 - iv.max_age_user
        for t in range(iv.start_slot, iv.end_slot + 1):
            h = sim.records[t - 1].pre_ages[v]
            o = opt_sim.records[t - 1].pre_ages[v]
            if h > o:
                violations.append(
                    Violation(
                        check="other_user_age",
                        interval=iv.index,
                        slot=t,
                        detail=f"user {v} policy age {h} exceeds reference age {o}",
                    )
                )
                break
    return violations


def check_sub_min_user_age(
    sim: SimTrace,
    opt_sim: SimTrace,
    intervals: Optional[tuple[Interval, ...]] = None,
) -> list[Violation]:
    """Three users: within each sub-interval, the youngest-role user is never
    older under the policy than under the reference schedule.

    The policy serves that user whenever they are the only Good option, which
    inside a sub-interval is every slot their channel is Good.
    """
    _ensure_same_setup(sim, opt_sim)
    if sim.channel.num_users != 3:
        raise ScopeError("the sub-interval age bound is defined for exactly 3 users")
    if intervals is None:
        intervals = decompose_intervals(sim)
    violations = []
    for iv in intervals:
        for sub in iv.sub_intervals:
            y = 3 - iv.max_age_user - sub.second_user
            for t in range(sub.start_slot, sub.end_slot + 1):
                h = sim.records[t - 1].pre_ages[y]
                o = opt_sim.records[t - 1].pre_ages[y]
                if h > o:
                    violations.append(
                        Violation(
                            check="sub_min_user_age",
                            interval=iv.index,
                            slot=t,
                            detail=(
                                f"user {y} policy age {h} exceeds reference age "
                                f"{o} in sub-interval {sub.index}"
                            ),
                        )
                    )
                    break
    return violations


# ---------------------------------------------------------------------------
# per-interval cost inequalities
# ---------------------------------------------------------------------------


def _tri(x: int) -> int:
    """x-th triangular number: minimum age sum of one user over x unserved slots."""
    return x * (x + 1) // 2


def check_interval_bounds(
    sim: SimTrace,
    opt_sim: SimTrace,
    intervals: Optional[tuple[Interval, ...]] = None,
) -> InequalityReport:
    """Exact slacks of the per-interval cost inequalities, for 2 or 3 users.

    Upper: the policy's cost within a complete interval exceeds the
    reference schedule's cost there by at most residue * length (plus, for
    three users, the same product per sub-interval).

    Lower: *any* schedule's cost within the interval is at least a
    closed-form function of the interval's length, its sub-interval lengths,
    and the residues carried into the following (sub-)intervals.  Both slacks
    must be nonnegative; the lower bound can legitimately fail only for the
    first interval of a run whose initial ages are not all one (the carried
    residue can then exceed the interval length), so that single combination
    is reported as a warning instead of a violation.
    """
    _ensure_same_setup(sim, opt_sim)
    n = sim.channel.num_users
    if n not in (2, 3):
        raise ScopeError("interval cost bounds are defined for 2 or 3 users")
    if intervals is None:
        intervals = decompose_intervals(sim)
    checks: list[IntervalCheck] = []
    violations: list[Violation] = []
    warnings: list[Violation] = []
    nonunit_start = any(a != 1 for a in sim.initial_ages)
    for iv in intervals:
        if not iv.complete:
            continue
        window = range(iv.start_slot, iv.end_slot + 1)
        cost_policy = sum(sim.records[t - 1].slot_cost for t in window)
        cost_opt = sum(opt_sim.records[t - 1].slot_cost for t in window)
        allowance = iv.residue * iv.length
        if n == 3:
            allowance += sum(s.sub_residue * s.length for s in iv.sub_intervals)
        upper_slack = cost_opt + allowance - cost_policy
        assert iv.next_residue is not None
        if n == 2:
            lower_form = (
                _tri(iv.length)
                + (iv.length - iv.next_residue)
                + _tri(iv.next_residue)
            )
        else:
            subs = iv.sub_intervals
            lower_form = _tri(iv.length)
            for j in range(len(subs) - 1):
                nxt = subs[j + 1].sub_residue
                lower_form += _tri(subs[j].length) + (subs[j].length - nxt) + _tri(nxt)
            lower_form += _tri(subs[-1].length) + subs[-1].length
        lower_slack = cost_opt - lower_form
        checks.append(
            IntervalCheck(
                interval=iv.index,
                cost_policy=cost_policy,
                cost_opt=cost_opt,
                upper_slack=upper_slack,
                lower_slack=lower_slack,
            )
        )
        if upper_slack < 0:
            violations.append(
                Violation(
                    check="interval_upper_bound",
                    interval=iv.index,
                    slot=None,
                    detail=(
                        f"policy cost {cost_policy} exceeds reference cost "
                        f"{cost_opt} plus allowance {allowance}"
                    ),
                )
            )
        if lower_slack < 0:
            v = Violation(
                check="interval_lower_bound",
                interval=iv.index,
                slot=None,
                detail=(
                    f"reference cost {cost_opt} below the closed-form minimum "
                    f"{lower_form}"
                ),
            )
            if iv.index == 1 and nonunit_start:
                warnings.append(v)
            else:
                violations.append(v)
    return InequalityReport(
        checks=tuple(checks),
        violations=tuple(violations),
        warnings=tuple(warnings),
    )


# ---------------------------------------------------------------------------
# end-to-end report
# ---------------------------------------------------------------------------

#: Worst-case cost ratio guarantees by user count.
RATIO_BOUNDS: dict[int, Fraction] = {2: Fraction(2), 3: Fraction(8, 3)}


def ratio_report(
    trace: ChannelTrace,
    initial_ages: Optional[Sequence[int]] = None,
    node_budget: int = 2_000_000,
) -> RatioReport:
    """Run the policy and the exact optimum on a trace and check everything.

    Returns the exact cost ratio, the applicable worst-case bound (2 or 3
    users), the interval decomposition, per-interval slacks, and any check
    violations.  Raises IntegrityError if the policy appears to beat the
    "optimum" — that can only mean a solver defect.
    """
    if trace.horizon < 1:
        raise ParameterError("ratio of an empty run is undefined")
    sim = simulate(trace, ma_csit_decide, initial_ages)
    opt = opt_exact(trace, initial_ages, node_budget=node_budget)
    opt_sim = replay(trace, opt.schedule, initial_ages)
    intervals = decompose_intervals(sim)
    violations: list[Violation] = []
    warnings: list[Violation] = []
    checks: tuple[IntervalCheck, ...] = ()
    n = trace.num_users
    violations.extend(check_max_user_gap_constant(sim, opt_sim, intervals))
    if n == 2:
        violations.extend(check_other_user_age_bound(sim, opt_sim, intervals))
    if n == 3:
        violations.extend(check_sub_min_user_age(sim, opt_sim, intervals))
    if n in RATIO_BOUNDS:
        bounds_report = check_interval_bounds(sim, opt_sim, intervals)
        checks = bounds_report.checks
        violations.extend(bounds_report.violations)
        warnings.extend(bounds_report.warnings)
    ratio = Fraction(sim.total_cost, opt.cost)
    if ratio < 1:
        raise IntegrityError(
            f"policy cost {sim.total_cost} below optimal cost {opt.cost}"
        )
    bound = RATIO_BOUNDS.get(n)
    within = None if bound is None else ratio <= bound
    if within is False:
        violations.append(
            Violation(
                check="ratio_bound",
                interval=None,
                slot=None,
                detail=f"cost ratio {float(ratio):.6f} exceeds bound {float(bound):.6f}",
            )
        )
    return RatioReport(
        num_users=n,
        horizon=trace.horizon,
        initial_ages=sim.initial_ages,
        cost_policy=sim.total_cost,
        cost_opt=opt.cost,
        ratio=ratio,
        bound=bound,
        within_bound=within,
        opt_schedule=opt.schedule,
        intervals=intervals,
        checks=checks,
        violations=tuple(violations),
        warnings=tuple(warnings),
    )
