"""Age-of-information downlink scheduling: simulation, exact offline optima,
interval analysis, and worst-case trace search.

The package models a base station serving users over per-slot binary-erasure
channels, one transmission per slot.  It provides deterministic policies, an
exact offline optimum, a decomposition of policy runs into intervals with
machine-checked cost inequalities, adversarial and i.i.d. trace generators,
and exhaustive/local searches for traces maximizing the policy-to-optimum
cost ratio.
"""

from .core import (
    BAD,
    GOOD,
    AgeVector,
    ChannelTrace,
    Decision,
    Policy,
    Schedule,
    SimTrace,
    SlotRecord,
    average_aoi,
    decision_key,
    policy_cost,
    replay,
    schedule_cost,
    simulate,
)
from .errors import (
    AoischedError,
    ConfigurationError,
    IntegrityError,
    ParameterError,
    ParseError,
    ResourceBudgetError,
    ScopeError,
)
from .policies import PolicyKind, ma_csit_decide, max_age_decide, policy_by_name
from .channels import (
    format_schedule,
    format_trace,
    gen_adversarial_2user,
    gen_adversarial_3user,
    gen_iid,
    load_schedule,
    load_trace,
    parse_schedule,
    parse_trace,
    save_schedule,
    save_trace,
    splitmix64_uniform,
)
from .optsolver import OptResult, brute_force_opt, opt_exact
from .analysis import (
    RATIO_BOUNDS,
    InequalityReport,
    Interval,
    IntervalCheck,
    RatioReport,
    SubInterval,
    Violation,
    check_interval_bounds,
    check_max_user_gap_constant,
    check_other_user_age_bound,
    check_sub_min_user_age,
    classify_residue_case,
    decompose_intervals,
    ensure_ma_run,
    ratio_report,
)
from .search import SearchResult, exhaustive_search, local_search, trace_from_index
from .experiments import (
    SuiteConfig,
    SuiteResult,
    checker_sensitivity_selftest,
    run_invariant_suite,
    stochastic_compare,
    sweep_three_user,
    sweep_two_user,
    write_csv,
)

__version__ = "0.1.0"

__all__ = [
    "AgeVector",
    "AoischedError",
    "BAD",
    "ChannelTrace",
    "ConfigurationError",
    "Decision",
    "GOOD",
    "InequalityReport",
    "IntegrityError",
    "Interval",
    "IntervalCheck",
    "OptResult",
    "ParameterError",
    "ParseError",
    "Policy",
    "PolicyKind",
    "RATIO_BOUNDS",
    "RatioReport",
    "ResourceBudgetError",
    "Schedule",
    "ScopeError",
    "SearchResult",
    "SimTrace",
    "SlotRecord",
    "SubInterval",
    "SuiteConfig",
    "SuiteResult",
    "Violation",
    "average_aoi",
    "brute_force_opt",
    "check_interval_bounds",
    "check_max_user_gap_constant",
    "check_other_user_age_bound",
    "check_sub_min_user_age",
    "checker_sensitivity_selftest",
    "classify_residue_case",
    "decision_key",
    "decompose_intervals",
    "ensure_ma_run",
    "exhaustive_search",
    "format_schedule",
    "format_trace",
    "gen_adversarial_2user",
    "gen_adversarial_3user",
    "gen_iid",
    "load_schedule",
    "load_trace",
    "local_search",
    "ma_csit_decide",
    "max_age_decide",
    "opt_exact",
    "parse_schedule",
    "parse_trace",
    "policy_by_name",
    "policy_cost",
    "ratio_report",
    "replay",
    "run_invariant_suite",
    "save_schedule",
    "save_trace",
    "schedule_cost",
    "simulate",
    "splitmix64_uniform",
    "stochastic_compare",
    "sweep_three_user",
    "sweep_two_user",
    "trace_from_index",
    "write_csv",
]
