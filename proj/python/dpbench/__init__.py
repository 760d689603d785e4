"""Dining philosophers coordination benchmark (C++ core)."""

from ._core import (
    Action,
    ConfigError,
    Decision,
    Mode,
    Observation,
    RunError,
    Status,
    TableState,
    TransportError,
    apply_sequential,
    apply_simultaneous,
    detect_deadlock,
    extract_intent,
    fairness,
    gini,
    new_table,
    observe,
    parse_response,
    render_decision_prompt,
    render_report,
    render_system_prompt,
    replay_transcript,
    report_from_directory,
    run_condition,
    scripted_decide,
    scripted_policy_names,
    standard_condition_codes,
)

__all__ = [
    "Action",
    "ConfigError",
    "Decision",
    "Mode",
    "Observation",
    "RunError",
    "Status",
    "TableState",
    "TransportError",
    "apply_sequential",
    "apply_simultaneous",
    "detect_deadlock",
    "extract_intent",
    "fairness",
    "gini",
    "new_table",
    "observe",
    "parse_response",
    "render_decision_prompt",
    "render_report",
    "render_system_prompt",
    "replay_transcript",
    "report_from_directory",
    "run_condition",
    "scripted_decide",
    "scripted_policy_names",
    "standard_condition_codes",
]
