"""Channel-trace generators and the text formats for traces and schedules.

Generators
----------
* ``gen_adversarial_2user`` / ``gen_adversarial_3user`` — periodic worst-case
  constructions whose per-period Good slots are laid out so that the
  channel-aware max-age policy keeps getting baited into serving the wrong
  user.  Period length is the construction parameter ``delta``.
* ``gen_iid`` — independent Bernoulli(p) Good states for every (slot, user)
  pair, driven by a counter-based SplitMix64 generator so that the trace for
  a given ``(p, num_users, horizon, seed)`` is identical across platforms,
  Python versions, and chunk sizes.

Text formats
------------
A trace file starts with a header line ``"<num_users> <horizon>"`` followed
by one line per slot of ``num_users`` characters over ``{G, B}``.  A schedule
file has one line per slot: a 0-based user index, or ``-`` for idle.  Blank
lines and ``#`` comments are ignored on input; writers emit the canonical
form with neither.
"""

from __future__ import annotations

import os
from typing import Sequence

import numpy as np

from .core import BAD, GOOD, ChannelTrace, Decision, Schedule
from .errors import ParameterError, ParseError

# ---------------------------------------------------------------------------
# adversarial constructions
# ---------------------------------------------------------------------------


def gen_adversarial_2user(delta: int, periods: int = 1) -> ChannelTrace:
    """Two-user periodic construction with period ``delta`` (even, >= 4).

    Within each period (slots numbered 1..delta):

    * slot 1:            user 0 Good          (bait: freshly reset user)
    * slot delta/2:      both Good
    * slot delta/2 + 1:  user 1 Good
    * slot delta:        both Good
    * everything else:   all Bad
    """
    if delta < 4 or delta % 2 != 0:
        raise ParameterError(f"two-user construction needs even delta >= 4, got {delta}")
    if periods < 1:
        raise ParameterError(f"periods must be >= 1, got {periods}")
    half = delta // 2
    period_rows: list[str] = []
    for s in range(1, delta + 1):
        if s == 1:
            row = GOOD + BAD
        elif s == half:
            row = GOOD + GOOD
        elif s == half + 1:
            row = BAD + GOOD
        elif s == delta:
            row = GOOD + GOOD
        else:
            row = BAD + BAD
        period_rows.append(row)
    return ChannelTrace(2, delta * periods, tuple(period_rows * periods))


def gen_adversarial_3user(delta: int, periods: int = 1) -> ChannelTrace:
    """Three-user periodic construction with period ``delta`` (multiple of 6, >= 24).

    Each period contains fifteen slots with at least one Good channel; their
    positions scale with ``delta`` but their number does not, so the offline
    optimum's work per period is independent of ``delta``.  Slots below are
    1-based within the period, users 0-based; all unlisted slots are all-Bad.
    """
    if delta % 6 != 0 or delta < 24:
        raise ParameterError(
            f"three-user construction needs delta a multiple of 6 and >= 24, got {delta}"
        )
    if periods < 1:
        raise ParameterError(f"periods must be >= 1, got {periods}")
    d6, d3, d2 = delta // 6, delta // 3, delta // 2
    good_sets: dict[int, tuple[int, ...]] = {
        1: (0, 1),
        2: (0,),
        3: (2,),
        d6: (0, 2),
        d6 + 1: (0,),
        d3 + 1: (1, 2),
        d3 + 2: (1,),
        d3 + 3: (0,),
        d2: (0, 1),
        d2 + 1: (1,),
        2 * d3 + 1: (0, 2),
        2 * d3 + 2: (2,),
        2 * d3 + 3: (1,),
        5 * d6: (1, 2),
        5 * d6 + 1: (2,),
    }
    if len(good_sets) != 15:
        # Smaller deltas would overlay distinct slots of the pattern.
        raise ParameterError(f"delta {delta} collapses the construction's slot layout")
    period_rows = []
    for s in range(1, delta + 1):
        good = good_sets.get(s, ())
        period_rows.append("".join(GOOD if u in good else BAD for u in range(3)))
    return ChannelTrace(3, delta * periods, tuple(period_rows * periods))


# ---------------------------------------------------------------------------
# deterministic i.i.d. generator (counter-based SplitMix64)
# ---------------------------------------------------------------------------

_SM64_GAMMA = 0x9E3779B97F4A7C15
_SM64_MIX1 = 0xBF58476D1CE4E5B9
_SM64_MIX2 = 0x94D049BB133111EB
_U64 = (1 << 64) - 1


def splitmix64_uniform(seed: int, index: int) -> float:
    """The ``index``-th uniform in [0, 1) of the stream for ``seed``.

    Counter-based: draw ``index`` depends only on ``(seed, index)``, never on
    preceding draws, so streams can be evaluated in any order or in bulk.
    The 53 high bits of the mixed state become the mantissa.
    """
    z = (seed + (index + 1) * _SM64_GAMMA) & _U64
    z = ((z ^ (z >> 30)) * _SM64_MIX1) & _U64
    z = ((z ^ (z >> 27)) * _SM64_MIX2) & _U64
    z = z ^ (z >> 31)
    return (z >> 11) * 2.0**-53


def _splitmix64_raw_array(seed: int, indices: np.ndarray) -> np.ndarray:
    """Vectorized mixed 64-bit outputs for a uint64 index array."""
    k = indices.astype(np.uint64)
    z = np.uint64(seed & _U64) + (k + np.uint64(1)) * np.uint64(_SM64_GAMMA)
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_SM64_MIX1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_SM64_MIX2)
    return z ^ (z >> np.uint64(31))


def _splitmix64_uniform_array(seed: int, indices: np.ndarray) -> np.ndarray:
    """Vectorized ``splitmix64_uniform`` over a uint64 index array."""
    z = _splitmix64_raw_array(seed, indices)
    return (z >> np.uint64(11)).astype(np.float64) * 2.0**-53


def gen_iid(p: float, num_users: int, horizon: int, seed: int) -> ChannelTrace:
    """Bernoulli(p) Good states, independent across (slot, user) pairs.

    The draw for slot t (1-based), user u (0-based) is stream index
    ``(t - 1) * num_users + u``; the state is Good iff the uniform is < p.
    ``p = 0`` and ``p = 1`` are exact (never / always Good).
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError(f"probability must be in [0, 1], got {p}")
    if num_users < 1:
        raise ParameterError(f"need at least one user, got {num_users}")
    if horizon < 0:
        raise ParameterError(f"horizon must be nonnegative, got {horizon}")
    seed = seed & _U64
    count = num_users * horizon
    uniforms = _splitmix64_uniform_array(seed, np.arange(count, dtype=np.uint64))
    good = uniforms < p
    codes = np.where(good, np.uint8(ord(GOOD)), np.uint8(ord(BAD))).reshape(
        horizon, num_users
    )
    rows = tuple(codes[t].tobytes().decode("ascii") for t in range(horizon))
    return ChannelTrace(num_users, horizon, rows)


# ---------------------------------------------------------------------------
# text formats
# ---------------------------------------------------------------------------


def format_trace(trace: ChannelTrace) -> str:
    lines = [f"{trace.num_users} {trace.horizon}"]
    lines.extend(trace.rows)
    return "\n".join(lines) + "\n"


def _content_lines(text: str) -> list[tuple[int, str]]:
    """(1-based line number, stripped content) for non-blank, non-comment lines."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        out.append((lineno, line))
    return out


def parse_trace(text: str) -> ChannelTrace:
    lines = _content_lines(text)
    if not lines:
        raise ParseError("empty trace: missing header line")
    header_no, header = lines[0]
    parts = header.split()
    if len(parts) != 2:
        raise ParseError(
            f"line {header_no}: header must be '<num_users> <horizon>', got {header!r}"
        )
    try:
        num_users, horizon = int(parts[0]), int(parts[1])
    except ValueError:
        raise ParseError(
            f"line {header_no}: header values must be integers, got {header!r}"
        ) from None
    if num_users < 1 or horizon < 0:
        raise ParseError(
            f"line {header_no}: need num_users >= 1 and horizon >= 0, got {header!r}"
        )
    body = lines[1:]
    if len(body) != horizon:
        raise ParseError(
            f"header promises {horizon} slot rows but file has {len(body)}"
        )
    rows = []
    for lineno, line in body:
        if len(line) != num_users or set(line) - {GOOD, BAD}:
            raise ParseError(
                f"line {lineno}: expected {num_users} characters over {{G,B}}, got {line!r}"
            )
        rows.append(line)
    return ChannelTrace(num_users, horizon, tuple(rows))


def format_schedule(schedule: Sequence[Decision]) -> str:
    return "".join(("-" if d is None else str(d)) + "\n" for d in schedule)


def parse_schedule(text: str, num_users: int | None = None) -> Schedule:
    decisions: list[Decision] = []
    for lineno, line in _content_lines(text):
        if line == "-":
            decisions.append(None)
            continue
        try:
            user = int(line)
        except ValueError:
            raise ParseError(
                f"line {lineno}: expected a user index or '-', got {line!r}"
            ) from None
        if user < 0 or (num_users is not None and user >= num_users):
            bound = f"0..{num_users - 1}" if num_users is not None else ">= 0"
            raise ParseError(f"line {lineno}: user index {user} outside {bound}")
        decisions.append(user)
    return tuple(decisions)


def load_trace(path: str | os.PathLike[str]) -> ChannelTrace:
    with open(path, "r", encoding="ascii") as fh:
        return parse_trace(fh.read())


def save_trace(path: str | os.PathLike[str], trace: ChannelTrace) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_trace(trace))


def load_schedule(path: str | os.PathLike[str], num_users: int | None = None) -> Schedule:
    with open(path, "r", encoding="ascii") as fh:
        return parse_schedule(fh.read(), num_users)


def save_schedule(path: str | os.PathLike[str], schedule: Sequence[Decision]) -> None:
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(format_schedule(schedule))
