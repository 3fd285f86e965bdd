from .checks import CheckResult, ack_before_event, exactly_one_ack, monotonic_events, rate_cap, run_checks
from .mock_agent import ROLES, HeadTurner, MockAgent, NameListener, VigilanceOperator, mock_agent
from .scenario import (
    EXIT_EXPECTATION,
    EXIT_INPUT,
    EXIT_OK,
    Expectation,
    RunResult,
    ScenarioScript,
    evaluate_expectations,
    field_matches,
    load_script,
    run_scenario,
    run_suite,
)
from .scorecard import ITEMS, OUT_OF_SCOPE, Scorecard, ScorecardRow, evaluate_scorecard, find_runs, to_markdown

__all__ = [
    "EXIT_EXPECTATION",
    "EXIT_INPUT",
    "EXIT_OK",
    "ITEMS",
    "OUT_OF_SCOPE",
    "ROLES",
    "CheckResult",
    "Expectation",
    "HeadTurner",
    "MockAgent",
    "NameListener",
    "RunResult",
    "ScenarioScript",
    "Scorecard",
    "ScorecardRow",
    "VigilanceOperator",
    "ack_before_event",
    "evaluate_expectations",
    "evaluate_scorecard",
    "exactly_one_ack",
    "field_matches",
    "find_runs",
    "load_script",
    "mock_agent",
    "monotonic_events",
    "rate_cap",
    "run_checks",
    "run_scenario",
    "run_suite",
    "to_markdown",
]
