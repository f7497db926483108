"""Shared fixtures and deterministic hypothesis configuration."""

from __future__ import annotations

import random

import pytest
from hypothesis import HealthCheck, settings

from aoisched import ChannelTrace

settings.register_profile(
    "ci",
    derandomize=True,
    max_examples=60,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")


def random_trace(num_users: int, horizon: int, seed: int) -> ChannelTrace:
    """Seeded random trace built with the stdlib RNG (independent of the
    package's own counter-based generator, so tests don't lean on the code
    under test)."""
    rng = random.Random(seed)
    rows = tuple(
        "".join("G" if rng.random() < 0.5 else "B" for _ in range(num_users))
        for _ in range(horizon)
    )
    return ChannelTrace(num_users, horizon, rows)


@pytest.fixture
def tiny_trace() -> ChannelTrace:
    """Four-slot two-user trace used by several frozen-value tests."""
    return ChannelTrace(2, 4, ("GB", "BG", "GG", "BB"))
