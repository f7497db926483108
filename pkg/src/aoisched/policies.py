"""Online scheduling policies.

Two deterministic policies are provided:

* ``ma_csit_decide`` — max-age with channel state information: serve the
  oldest user among those whose channel is currently Good, idle if nobody's
  channel is Good.
* ``max_age_decide`` — channel-oblivious max-age: always serve the oldest
  user, whether or not the transmission can succeed.

Both break age ties toward the lowest user index, so runs are fully
deterministic.
"""

from __future__ import annotations

import enum

from .core import GOOD, AgeVector, Decision
from .errors import ConfigurationError


def ma_csit_decide(ages: AgeVector, channels: str) -> Decision:
    """Serve the highest-age user with a Good channel; idle if none is Good.

    Ties on age go to the lowest user index.
    """
    if len(channels) != len(ages):
        raise ConfigurationError(
            f"{len(ages)} ages but {len(channels)} channel states"
        )
    best: Decision = None
    best_age = 0
    for u, age in enumerate(ages):
        if channels[u] == GOOD and age > best_age:
            best = u
            best_age = age
    return best


def max_age_decide(ages: AgeVector) -> Decision:
    """Serve the highest-age user regardless of channel state (lowest index on ties)."""
    best = 0
    for u in range(1, len(ages)):
        if ages[u] > ages[best]:
            best = u
    return best


class PolicyKind(enum.Enum):
    """Named policies selectable from the CLI and experiments."""

    MA_CSIT = "ma-csit"
    MAX_AGE = "max-age"

    @property
    def uses_csit(self) -> bool:
        """Whether the policy reads the current channel states."""
        return self is PolicyKind.MA_CSIT

    def decide(self, ages: AgeVector, channels: str) -> Decision:
        if self is PolicyKind.MA_CSIT:
            return ma_csit_decide(ages, channels)
        return max_age_decide(ages)


def policy_by_name(name: str) -> PolicyKind:
    for kind in PolicyKind:
        if kind.value == name:
            return kind
    known = ", ".join(k.value for k in PolicyKind)
    raise ConfigurationError(f"unknown policy {name!r} (known: {known})")
