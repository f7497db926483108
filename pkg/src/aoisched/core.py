"""Slot-level simulation core for multi-user downlink age-of-information scheduling.

Model
-----
Time is slotted, ``t = 1 .. T``.  A base station serves ``n`` users over
binary-erasure channels: in each slot every user's channel is either Good
(``'G'``, a transmission would succeed) or Bad (``'B'``, it would be erased).
At most one user is served per slot; serving on a Good channel delivers a
fresh update.

Each user carries an age ``h_u(t)`` — the number of slots since the last
delivered update, measured *before* any service in slot ``t``.  The cost of
slot ``t`` is the sum of those pre-service ages, and a run's total cost is
the sum over all slots.  Ages then advance: a user successfully served in
slot ``t`` has age 1 at ``t + 1`` (the update delivered in ``t`` is one slot
old by then); everyone else ages by one.  All ages start at 1 by default,
i.e. every user received an update in the (virtual) slot 0.

All cost arithmetic is exact integer arithmetic; nothing in this module
rounds or approximates.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

from .errors import ConfigurationError, ParameterError

GOOD = "G"
BAD = "B"

#: A scheduling decision for one slot: a 0-based user index, or ``None`` to idle.
Decision = Optional[int]

#: Per-user ages at some instant, indexed by user.
AgeVector = tuple[int, ...]

#: One decision per slot.
Schedule = tuple[Decision, ...]

#: A policy maps (pre-service ages, per-user channel states) to a decision.
Policy = Callable[[AgeVector, str], Decision]


def decision_key(decision: Decision) -> int:
    """Total order on decisions used for deterministic tie-breaking.

    Idle sorts before serving user 0, which sorts before user 1, and so on.
    Comparing tuples of these keys gives a lexicographic order on schedules.
    """
    return -1 if decision is None else decision


@dataclass(frozen=True)
class ChannelTrace:
    """A fully specified channel realization: one row of n states per slot.

    ``rows[t - 1]`` is a string of length ``num_users`` over {'G', 'B'}
    giving slot t's channel states, character u for user u.
    """

    num_users: int
    horizon: int
    rows: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.num_users < 1:
            raise ParameterError(f"need at least one user, got {self.num_users}")
        if self.horizon < 0:
            raise ParameterError(f"horizon must be nonnegative, got {self.horizon}")
        if len(self.rows) != self.horizon:
            raise ConfigurationError(
                f"trace has {len(self.rows)} rows but horizon {self.horizon}"
            )
        for i, row in enumerate(self.rows):
            if len(row) != self.num_users:
                raise ConfigurationError(
                    f"row {i + 1} has {len(row)} states, expected {self.num_users}"
                )
            bad = set(row) - {GOOD, BAD}
            if bad:
                raise ConfigurationError(
                    f"row {i + 1} contains invalid channel state(s) {sorted(bad)!r}"
                )

    def row(self, slot: int) -> str:
        """Channel states of 1-based ``slot``."""
        if not 1 <= slot <= self.horizon:
            raise ParameterError(f"slot {slot} outside 1..{self.horizon}")
        return self.rows[slot - 1]

    def is_good(self, slot: int, user: int) -> bool:
        return self.row(slot)[user] == GOOD

    def good_users(self, slot: int) -> tuple[int, ...]:
        """0-based indices of users whose channel is Good in ``slot``."""
        row = self.row(slot)
        return tuple(u for u in range(self.num_users) if row[u] == GOOD)


@dataclass(frozen=True)
class SlotRecord:
    """Everything that happened in one slot of a simulated run."""

    slot: int                #: 1-based slot index
    pre_ages: AgeVector      #: ages before any service this slot
    decision: Decision       #: user served, or None for idle
    success: bool            #: decision was a user with a Good channel
    slot_cost: int           #: sum of pre_ages


@dataclass(frozen=True)
class SimTrace:
    """A complete simulated run: the channel realization plus per-slot records."""

    channel: ChannelTrace
    initial_ages: AgeVector
    records: tuple[SlotRecord, ...]
    total_cost: int

    def final_ages(self) -> AgeVector:
        """Ages just after the horizon, i.e. pre-service ages of slot T + 1."""
        if not self.records:
            return self.initial_ages
        last = self.records[-1]
        return _step_ages(last.pre_ages, last.decision if last.success else None)

    def decisions(self) -> Schedule:
        return tuple(r.decision for r in self.records)


def _resolve_initial_ages(num_users: int, initial_ages: Sequence[int] | None) -> AgeVector:
    if initial_ages is None:
        return (1,) * num_users
    ages = tuple(int(a) for a in initial_ages)
    if len(ages) != num_users:
        raise ConfigurationError(
            f"initial ages has length {len(ages)}, expected {num_users}"
        )
    if any(a < 1 for a in ages):
        raise ParameterError(f"initial ages must be >= 1, got {ages}")
    return ages


def _step_ages(pre_ages: AgeVector, delivered: Decision) -> AgeVector:
    """Advance ages by one slot; ``delivered`` is the successfully served user, if any."""
    return tuple(
        1 if u == delivered else age + 1 for u, age in enumerate(pre_ages)
    )


def simulate(
    trace: ChannelTrace,
    policy: Policy,
    initial_ages: Sequence[int] | None = None,
) -> SimTrace:
    """Run ``policy`` against a channel trace, recording every slot.

    The policy sees the current pre-service ages and the slot's channel-state
    row; serving a user whose channel is Bad is allowed but wasted (no reset).
    """
    ages = _resolve_initial_ages(trace.num_users, initial_ages)
    initial = ages
    records: list[SlotRecord] = []
    total = 0
    for slot in range(1, trace.horizon + 1):
        row = trace.rows[slot - 1]
        decision = policy(ages, row)
        if decision is not None and not 0 <= decision < trace.num_users:
            raise ConfigurationError(
                f"policy chose user {decision} in slot {slot}, outside 0..{trace.num_users - 1}"
            )
        success = decision is not None and row[decision] == GOOD
        cost = sum(ages)
        total += cost
        records.append(
            SlotRecord(
                slot=slot,
                pre_ages=ages,
                decision=decision,
                success=success,
                slot_cost=cost,
            )
        )
        ages = _step_ages(ages, decision if success else None)
    return SimTrace(
        channel=trace,
        initial_ages=initial,
        records=tuple(records),
        total_cost=total,
    )


def replay(
    trace: ChannelTrace,
    schedule: Sequence[Decision],
    initial_ages: Sequence[int] | None = None,
) -> SimTrace:
    """Replay a fixed decision sequence against a channel trace."""
    if len(schedule) != trace.horizon:
        raise ConfigurationError(
            f"schedule has {len(schedule)} decisions but horizon is {trace.horizon}"
        )
    decisions = list(schedule)
    # simulate() calls the policy exactly once per slot, in slot order, so a
    # plain iterator replays the sequence.
    it = iter(decisions)

    def stepper(_ages: AgeVector, _row: str) -> Decision:
        return next(it)

    return simulate(trace, stepper, initial_ages)


def policy_cost(
    trace: ChannelTrace,
    policy: Policy,
    initial_ages: Sequence[int] | None = None,
) -> int:
    """Total cost of running ``policy``, without building per-slot records.

    Equivalent to ``simulate(...).total_cost`` but allocation-free per slot;
    used by the long-horizon experiments.
    """
    ages = list(_resolve_initial_ages(trace.num_users, initial_ages))
    n = trace.num_users
    total = 0
    for slot in range(1, trace.horizon + 1):
        row = trace.rows[slot - 1]
        decision = policy(tuple(ages), row)
        if decision is not None and not 0 <= decision < n:
            raise ConfigurationError(
                f"policy chose user {decision} in slot {slot}, outside 0..{n - 1}"
            )
        total += sum(ages)
        delivered = decision if decision is not None and row[decision] == GOOD else None
        for u in range(n):
            ages[u] = 1 if u == delivered else ages[u] + 1
    return total


def average_aoi(sim: SimTrace) -> Fraction:
    """Time-averaged per-user age over the run, as an exact fraction."""
    if sim.channel.horizon == 0:
        raise ParameterError("average age of an empty run is undefined")
    return Fraction(sim.total_cost, sim.channel.horizon * sim.channel.num_users)


def schedule_cost(
    trace: ChannelTrace,
    schedule: Sequence[Decision],
    initial_ages: Sequence[int] | None = None,
) -> int:
    """Total cost of a fixed decision sequence (no record allocation)."""
    if len(schedule) != trace.horizon:
        raise ConfigurationError(
            f"schedule has {len(schedule)} decisions but horizon is {trace.horizon}"
        )
    ages = list(_resolve_initial_ages(trace.num_users, initial_ages))
    n = trace.num_users
    total = 0
    for slot in range(1, trace.horizon + 1):
        decision = schedule[slot - 1]
        if decision is not None and not 0 <= decision < n:
            raise ConfigurationError(
                f"schedule serves user {decision} in slot {slot}, outside 0..{n - 1}"
            )
        total += sum(ages)
        row = trace.rows[slot - 1]
        delivered = decision if decision is not None and row[decision] == GOOD else None
        for u in range(n):
            ages[u] = 1 if u == delivered else ages[u] + 1
    return total
