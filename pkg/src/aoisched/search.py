"""Search for channel traces maximizing the policy-to-optimum cost ratio.

Two strategies:

* ``exhaustive_search`` — evaluate every trace of a given size (or a seeded
  uniform sample of them) with vectorized batch implementations of the policy
  run and the offline optimum, tracking the exact best ratio by integer
  cross-multiplication.  The winner is re-verified by the scalar
  reference path before being returned.
* ``local_search`` — hill climbing over single-(slot, user) channel flips,
  warm-started from the known periodic constructions that divide the horizon
  plus seeded random traces.

Traces of ``n`` users over ``t`` slots are enumerated as integers: bit
``(slot - 1) * n + user`` set means that user's channel is Good in that slot.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .channels import (
    _splitmix64_raw_array,
    gen_adversarial_2user,
    gen_adversarial_3user,
)
from .core import BAD, GOOD, ChannelTrace, policy_cost, _resolve_initial_ages
from .errors import IntegrityError, ParameterError, ResourceBudgetError
from .optsolver import opt_exact
from .policies import ma_csit_decide
from .analysis import ratio_report


@dataclass(frozen=True)
class SearchResult:
    best_ratio: Fraction
    trace: ChannelTrace
    sequences_examined: int
    method: str


def trace_from_index(index: int, num_users: int, horizon: int) -> ChannelTrace:
    """Decode a trace from its enumeration integer (see module docstring)."""
    if index < 0 or index >= 1 << (num_users * horizon):
        raise ParameterError(
            f"trace index {index} outside 0..2^{num_users * horizon} - 1"
        )
    rows = []
    for s in range(horizon):
        rows.append(
            "".join(
                GOOD if (index >> (s * num_users + u)) & 1 else BAD
                for u in range(num_users)
            )
        )
    return ChannelTrace(num_users, horizon, tuple(rows))


# ---------------------------------------------------------------------------
# vectorized batch evaluation
# ---------------------------------------------------------------------------


def _good_bits(idx: np.ndarray, slot: int, num_users: int) -> np.ndarray:
    """Boolean (batch, num_users) Good mask for 1-based ``slot``."""
    out = np.empty((idx.shape[0], num_users), dtype=bool)
    for u in range(num_users):
        shift = np.uint64((slot - 1) * num_users + u)
        out[:, u] = ((idx >> shift) & np.uint64(1)) != 0
    return out


def _ma_costs_batch(
    idx: np.ndarray, num_users: int, horizon: int, init: tuple[int, ...]
) -> np.ndarray:
    """Policy cost of every trace index in the batch (int64)."""
    batch = idx.shape[0]
    ages = np.tile(np.array(init, dtype=np.int32), (batch, 1))
    cost = np.zeros(batch, dtype=np.int64)
    for s in range(1, horizon + 1):
        cost += ages.sum(axis=1, dtype=np.int64)
        good = _good_bits(idx, s, num_users)
        # argmax of ages masked to Good users; first occurrence = lowest
        # index, matching the scalar policy's tie-break.  Ages are >= 1, so
        # the 0 fill never collides with a real age.
        masked = np.where(good, ages, 0)
        served = masked.argmax(axis=1)
        rows = np.nonzero(good.any(axis=1))[0]
        ages += 1
        ages[rows, served[rows]] = 1
    return cost


def _opt_costs_batch(
    idx: np.ndarray, num_users: int, horizon: int, init: tuple[int, ...]
) -> np.ndarray:
    """Offline-optimal cost of every trace index in the batch (int64).

    Dynamic program over per-user last-service slots, state index 0 standing
    for the virtual pre-horizon service implied by the initial age and index
    k >= 1 for a service in slot k.
    """
    batch = idx.shape[0]
    n, t = num_users, horizon
    states = (t + 1,) * n
    inf = np.int32(1 << 30)
    dp = np.full((batch,) + states, inf, dtype=np.int32)
    dp[(slice(None),) + (0,) * n] = 0
    vals = [
        np.array([1 - init[u]] + list(range(1, t + 1)), dtype=np.int32)
        for u in range(n)
    ]
    for s in range(1, t + 1):
        age_grid = np.zeros(states, dtype=np.int32)
        for u in range(n):
            shape = [1] * n
            shape[u] = t + 1
            age_grid = age_grid + (np.int32(s) - vals[u]).reshape(shape)
        dp = dp + age_grid
        new_dp = dp.copy()
        good = _good_bits(idx, s, n)
        for u in range(n):
            bit = good[:, u]
            if not bit.any():
                continue
            axis = 1 + u
            reduced = dp.min(axis=axis)
            sl = (slice(None),) * axis + (s,)
            target = new_dp[sl]
            improved = np.minimum(target, reduced)
            mask = bit.reshape((batch,) + (1,) * (n - 1))
            new_dp[sl] = np.where(mask, improved, target)
        dp = new_dp
    return dp.reshape(batch, -1).min(axis=1).astype(np.int64)


# ---------------------------------------------------------------------------
# exhaustive / sampled search
# ---------------------------------------------------------------------------


def _sample_indices(seed: int, count: int, space_bits: int) -> np.ndarray:
    """First ``count`` distinct trace indices of the seeded sample stream.

    Uniform over the index space (the space size divides 2^64), deduplicated
    preserving first occurrence, so the sample for a larger ``count`` extends
    the sample for a smaller one.
    """
    mask = (1 << space_bits) - 1
    seen: set[int] = set()
    order: list[int] = []
    pos = 0
    step = max(4096, count // 4)
    while len(order) < count:
        raw = _splitmix64_raw_array(seed, np.arange(pos, pos + step, dtype=np.uint64))
        pos += step
        for v in raw:
            i = int(v) & mask
            if i not in seen:
                seen.add(i)
                order.append(i)
                if len(order) == count:
                    break
    return np.array(order, dtype=np.uint64)


def exhaustive_search(
    num_users: int,
    horizon: int,
    initial_ages: Optional[Sequence[int]] = None,
    *,
    max_sequences: int = 1 << 24,
    sample: Optional[int] = None,
    seed: int = 0,
    chunk: int = 8192,
) -> SearchResult:
    """Worst cost ratio over all (or ``sample`` seeded-random) traces of a size.

    Full enumeration refuses to run past ``max_sequences`` traces; pass
    ``sample`` to evaluate that many distinct uniformly drawn traces instead.
    Ties on the ratio keep the earliest trace in enumeration (or draw) order.
    The winning trace is re-evaluated with the scalar reference
    implementations before being returned.
    """
    if num_users < 1 or horizon < 1:
        raise ParameterError("need at least one user and one slot")
    bits = num_users * horizon
    if bits > 62:
        raise ParameterError(
            f"trace space of 2^{bits} indices does not fit the 64-bit encoding"
        )
    init = _resolve_initial_ages(num_users, initial_ages)
    space = 1 << bits
    if sample is None:
        if space > max_sequences:
            raise ResourceBudgetError(
                f"full enumeration needs {space} evaluations, over the limit "
                f"of {max_sequences}; raise it or pass a sample size"
            )
        total = space
    else:
        if sample < 1:
            raise ParameterError(f"sample size must be positive, got {sample}")
        total = min(sample, space)

    if sample is None:
        all_indices = None  # enumerate arithmetically per chunk
    else:
        all_indices = _sample_indices(seed, total, bits)

    best_num = 0  # policy cost of the best trace seen
    best_den = 1  # optimal cost of the best trace seen
    best_index = 0
    examined = 0
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        if all_indices is None:
            idx = np.arange(start, stop, dtype=np.uint64)
        else:
            idx = all_indices[start:stop]
        ma = _ma_costs_batch(idx, num_users, horizon, init)
        opt = _opt_costs_batch(idx, num_users, horizon, init)
        examined += idx.shape[0]

        better = ma * best_den > best_num * opt
        if better.any():
            for j in np.nonzero(better)[0]:
                m, o = int(ma[j]), int(opt[j])
                if m * best_den > best_num * o:
                    best_num, best_den, best_index = m, o, int(idx[j])
    trace = trace_from_index(best_index, num_users, horizon)
    report = ratio_report(trace, init)
    if report.ratio != Fraction(best_num, best_den):
        raise IntegrityError(
            f"vectorized search claimed ratio {best_num}/{best_den} for its "
            f"winner but the reference run gives {report.ratio}"
        )
    return SearchResult(
        best_ratio=report.ratio,
        trace=trace,
        sequences_examined=examined,
        method="exhaustive" if sample is None else "sampled",
    )


# ---------------------------------------------------------------------------
# local search
# ---------------------------------------------------------------------------


def _flip(trace: ChannelTrace, slot: int, user: int) -> ChannelTrace:
    """Copy of the trace with one (1-based slot, user) channel state flipped."""
    row = trace.rows[slot - 1]
    flipped = GOOD if row[user] == BAD else BAD
    new_row = row[:user] + flipped + row[user + 1 :]
    rows = trace.rows[: slot - 1] + (new_row,) + trace.rows[slot:]
    return ChannelTrace(trace.num_users, trace.horizon, rows)


def _construction_starts(num_users: int, horizon: int) -> list[ChannelTrace]:
    """Known periodic constructions whose period divides the horizon."""
    starts = []
    if num_users == 2:
        for delta in range(4, horizon + 1, 2):
            if horizon % delta == 0:
                starts.append(gen_adversarial_2user(delta, horizon // delta))
    elif num_users == 3:
        for delta in range(24, horizon + 1, 6):
            if horizon % delta == 0:
                starts.append(gen_adversarial_3user(delta, horizon // delta))
    return starts


def _random_trace(
    rng: random.Random, num_users: int, horizon: int
) -> ChannelTrace:
    rows = tuple(
        "".join(GOOD if rng.getrandbits(1) else BAD for _ in range(num_users))
        for _ in range(horizon)
    )
    return ChannelTrace(num_users, horizon, rows)


def local_search(
    num_users: int,
    horizon: int,
    initial_ages: Optional[Sequence[int]] = None,
    *,
    seed: int = 0,
    iterations: int = 50,
    restarts: int = 4,
    node_budget: int = 2_000_000,
) -> SearchResult:
    """Hill-climb the cost ratio by flipping one channel state at a time.

    Starts from every periodic construction whose period divides the horizon
    plus ``restarts`` seeded random traces.  Each climb takes the best
    strictly improving single flip (slots scanned in order, users in order)
    until no flip improves or ``iterations`` steps were taken;
    ``iterations=0`` just evaluates the starting pool.  Fully deterministic
    for a given seed.
    """
    if num_users < 1 or horizon < 1:
        raise ParameterError("need at least one user and one slot")
    if iterations < 0 or restarts < 0:
        raise ParameterError("iterations and restarts must be nonnegative")
    init = _resolve_initial_ages(num_users, initial_ages)
    evals = 0

    def ratio_of(trace: ChannelTrace) -> tuple[int, int]:
        nonlocal evals
        evals += 1
        cost_ma = policy_cost(trace, ma_csit_decide, init)
        cost_opt = opt_exact(trace, init, node_budget=node_budget).cost
        return cost_ma, cost_opt

    rng = random.Random(seed)
    pool = _construction_starts(num_users, horizon)
    pool.extend(_random_trace(rng, num_users, horizon) for _ in range(restarts))
    if not pool:
        pool.append(_random_trace(rng, num_users, horizon))

    best_num, best_den = 0, 1
    best_trace = pool[0]
    for start in pool:
        num, den = ratio_of(start)
        current, cur_num, cur_den = start, num, den
        for _ in range(iterations):
            step_trace = None
            step_num, step_den = cur_num, cur_den
            for slot in range(1, horizon + 1):
                for user in range(num_users):
                    cand = _flip(current, slot, user)
                    cnum, cden = ratio_of(cand)
                    if cnum * step_den > step_num * cden:
                        step_trace, step_num, step_den = cand, cnum, cden
            if step_trace is None:
                break
            current, cur_num, cur_den = step_trace, step_num, step_den
        if cur_num * best_den > best_num * cur_den:
            best_num, best_den, best_trace = cur_num, cur_den, current

    report = ratio_report(best_trace, init, node_budget=node_budget)
    if report.ratio != Fraction(best_num, best_den):
        raise IntegrityError(
            f"local search bookkeeping claimed {best_num}/{best_den} but the "
            f"reference run gives {report.ratio}"
        )
    return SearchResult(
        best_ratio=report.ratio,
        trace=best_trace,
        sequences_examined=evals,
        method="local",
    )
