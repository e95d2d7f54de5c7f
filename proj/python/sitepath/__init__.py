"""Conflict-based multi-agent path planning for construction sites."""

from ._sitepath import (
    ConflictStats,
    ExecutionState,
    GridMap,
    LayoutSuggestion,
    MapParseError,
    NoMidwayError,
    PlanResult,
    ReplanResult,
    Scenario,
    ScenarioError,
    UnreachableError,
    UnsolvableError,
    apply_layout,
    begin_execution,
    collect_stats,
    inject_delay,
    load_map,
    load_scenario,
    make_archetype,
    make_bottleneck,
    make_bridging_scenario,
    make_sole_corridor_scenario,
    parse_map,
    parse_scenario,
    replan,
    shortest_path,
    solve,
    suggest_layout,
    suggest_removal,
    write_corpus,
)

__all__ = [name for name in dir() if not name.startswith("_")]
