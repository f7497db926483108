"""Exact offline optimum for downlink age minimization.

Given a fully known channel trace, compute the minimum achievable total cost
over *all* schedules (one service or idle per slot), together with one
optimal schedule.  Ties between equally cheap schedules are broken
lexicographically — slot by slot, idle before user 0 before user 1 … — so
every solver here returns a single canonical answer.

Two implementations are provided:

* ``opt_exact`` — an event-driven dynamic program over vectors of
  last-successful-service slots.  Slots where every channel is Bad are
  charged in closed form, so runtime scales with the number of slots that
  have at least one Good channel rather than with the horizon.  Dominated
  states are pruned.  Exact (integer arithmetic throughout); refuses to
  exceed ``node_budget``.
* ``brute_force_opt`` — depth-first enumeration of schedules, used as an
  independent oracle for the dynamic program on small horizons.  It skips
  branches that provably cannot beat an explored one (serving a Bad channel
  costs the same as idling but sorts later; the final slot's decision cannot
  change the cost), which keeps it honest but not glacial.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import (
    GOOD,
    ChannelTrace,
    Schedule,
    _resolve_initial_ages,
    replay,
)
from .errors import IntegrityError, ResourceBudgetError

#: Vector of last successful-service slots, one per user (<= 0 for the
#: virtual pre-horizon service implied by the initial ages).
_StateVec = tuple[int, ...]


@dataclass(frozen=True)
class OptResult:
    """Outcome of an exact optimization.

    ``nodes`` counts the work actually performed: candidate states generated
    by ``opt_exact``, or complete schedules evaluated by ``brute_force_opt``.
    """

    cost: int
    schedule: Schedule
    nodes: int


def _gap_cost(num_users: int, vec_sum: int, first: int, last: int) -> int:
    """Total cost of idling through all-Bad slots ``first..last`` inclusive.

    With last-service vector ``s``, slot t costs ``sum_u (t - s_u)``; summed
    over the gap this is ``n * sum(t) - len * sum(s)``.
    """
    if last < first:
        return 0
    length = last - first + 1
    return num_users * (first + last) * length // 2 - length * vec_sum


def opt_exact(
    trace: ChannelTrace,
    initial_ages=None,
    node_budget: int = 2_000_000,
) -> OptResult:
    """Minimum total cost and the lexicographically-first optimal schedule.

    State space: one entry per reachable vector of last successful-service
    slots; each carries the cheapest (cost, decision-sequence) pair reaching
    it, compared as tuples so equal costs resolve to the lexicographically
    smaller sequence.  Only slots with at least one Good channel branch;
    serving a Bad channel is never explored because idling reaches the same
    state at the same cost with a smaller decision key.

    A state A is pruned when some other state B has cost(B) <= cost(A),
    sequence(B) <= sequence(A), and every user served by B at least as
    recently: any completion of A is then matched or beaten by the same
    completion of B, in cost and in tie-break order.
    """
    n, horizon = trace.num_users, trace.horizon
    init = _resolve_initial_ages(n, initial_ages)
    # Virtual service slots: a user with initial age a was last served at 1 - a.
    vec0: _StateVec = tuple(1 - a for a in init)
    states: dict[_StateVec, tuple[int, tuple[int, ...]]] = {vec0: (0, ())}
    events = [t for t in range(1, horizon + 1) if GOOD in trace.rows[t - 1]]
    nodes = 0
    prev = 0
    for t in events:
        good = trace.good_users(t)
        candidates: dict[_StateVec, tuple[int, tuple[int, ...]]] = {}
        for vec, (cost, seq) in states.items():
            vs = sum(vec)
            base = cost + _gap_cost(n, vs, prev + 1, t - 1) + n * t - vs
            nodes += 1 + len(good)
            idle_val = (base, seq + (-1,))
            if vec not in candidates or idle_val < candidates[vec]:
                candidates[vec] = idle_val
            for u in good:
                nv = vec[:u] + (t,) + vec[u + 1 :]
                val = (base, seq + (u,))
                if nv not in candidates or val < candidates[nv]:
                    candidates[nv] = val
        if nodes > node_budget:
            raise ResourceBudgetError(
                f"exact solver exceeded its node budget of {node_budget} "
                f"at slot {t}; rerun with a larger budget"
            )
        states = _prune(candidates)
        prev = t
    finals = []
    for vec, (cost, seq) in states.items():
        total = cost + _gap_cost(n, sum(vec), prev + 1, horizon)
        finals.append((total, seq))
    best_cost, best_seq = min(finals)
    schedule: list = [None] * horizon
    for i, t in enumerate(events):
        key = best_seq[i]
        schedule[t - 1] = None if key == -1 else key
    result = OptResult(cost=best_cost, schedule=tuple(schedule), nodes=nodes)
    check = replay(trace, result.schedule, init).total_cost
    if check != best_cost:
        raise IntegrityError(
            f"exact solver inconsistency: replayed cost {check} != computed {best_cost}"
        )
    return result


def _prune(
    candidates: dict[_StateVec, tuple[int, tuple[int, ...]]],
) -> dict[_StateVec, tuple[int, tuple[int, ...]]]:
    """Drop states dominated in (cost, sequence) and service recency."""
    items = sorted(candidates.items(), key=lambda kv: kv[1])
    kept: list[tuple[_StateVec, tuple[int, tuple[int, ...]]]] = []
    for vec, val in items:
        dominated = False
        for kvec, _kval in kept:
            # kept entries sort at or before (cost, seq) of the candidate,
            # so only the recency comparison remains.
            if all(kc >= c for kc, c in zip(kvec, vec)):
                dominated = True
                break
        if not dominated:
            kept.append((vec, val))
    return dict(kept)


def brute_force_opt(
    trace: ChannelTrace,
    initial_ages=None,
    max_sequences: int = 5_000_000,
) -> OptResult:
    """Depth-first schedule enumeration; oracle for ``opt_exact``.

    Explores decisions in lexicographic order (idle, user 0, user 1, …) and
    keeps the first schedule achieving each strictly better cost, which makes
    the returned schedule the lexicographically smallest optimum.  Two safe
    shortcuts: branches that serve a Bad channel are skipped (identical ages
    and cost to idling, larger tie-break key), and the final slot is pinned
    to idle (its decision can only affect ages after the horizon).
    """
    n, horizon = trace.num_users, trace.horizon
    if (n + 1) ** horizon > max_sequences:
        raise ResourceBudgetError(
            f"brute force would enumerate {(n + 1) ** horizon} schedules, "
            f"over the limit of {max_sequences}"
        )
    init = _resolve_initial_ages(n, initial_ages)
    if horizon == 0:
        return OptResult(cost=0, schedule=(), nodes=0)
    rows = trace.rows
    best_cost: int | None = None
    best: Schedule = ()
    leaves = 0
    decisions: list = [None] * horizon

    def rec(slot: int, ages: tuple[int, ...], acc: int) -> None:
        nonlocal best_cost, best, leaves
        total_here = acc + sum(ages)
        if slot == horizon:
            leaves += 1
            if best_cost is None or total_here < best_cost:
                best_cost = total_here
                decisions[slot - 1] = None
                best = tuple(decisions)
            return
        row = rows[slot - 1]
        decisions[slot - 1] = None
        rec(slot + 1, tuple(a + 1 for a in ages), total_here)
        for u in range(n):
            if row[u] == GOOD:
                decisions[slot - 1] = u
                rec(
                    slot + 1,
                    tuple(1 if v == u else ages[v] + 1 for v in range(n)),
                    total_here,
                )

    rec(1, init, 0)
    assert best_cost is not None
    return OptResult(cost=best_cost, schedule=best, nodes=leaves)
