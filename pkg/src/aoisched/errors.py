"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration, parameter, parse and
integrity problems are user-input errors (exit 1); invariant violations
found by the checkers exit 2; refusing to exceed a resource budget exits 3.
"""

from __future__ import annotations


class AoischedError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(AoischedError):
    """Inconsistent dimensions or incompatible inputs (e.g. age vector of the wrong length)."""


class ParameterError(AoischedError):
    """A generator or experiment parameter outside its supported range."""


class ParseError(AoischedError):
    """Malformed trace, schedule, or config text; messages name the offending line."""


class ResourceBudgetError(AoischedError):
    """An exact computation would exceed its configured budget.

    Raised instead of silently approximating; the message states the budget
    that would be required.
    """


class IntegrityError(AoischedError):
    """Input data inconsistent with what it claims to be (e.g. a run that was not produced by the stated policy)."""


class ScopeError(AoischedError):
    """A check was requested outside the user counts it is defined for."""
