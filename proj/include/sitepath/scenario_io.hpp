#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "sitepath/analysis.hpp"
#include "sitepath/cbs.hpp"
#include "sitepath/replan.hpp"

namespace sitepath {

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Parses a YAML scenario. `map` is resolved against `base_dir`.
Scenario parse_scenario(std::string_view yaml, const std::string& base_dir);
Scenario load_scenario(const std::string& path);
/// Scenario YAML referring to the map file `map_ref`.
std::string scenario_to_yaml(const Scenario& scenario, const std::string& map_ref);

/// Agent ids in scenario order.
std::vector<std::string> agent_ids(const Scenario& scenario);

/// One row per agent: id, start cell, then one cell per timestep. Rows are
/// written in `order`; shorter rows are padded with empty fields.
std::string schedule_to_csv(const Schedule& schedule, std::span<const std::string> order);

struct ScheduleRow {
    std::string agent;
    std::vector<Cell> cells;
};
std::vector<ScheduleRow> parse_schedule_csv(std::string_view csv);

/// Rebuilds a schedule from CSV rows against the scenario; throws ScenarioError
/// when agents differ or a path is not valid on the map.
Schedule schedule_from_rows(const std::vector<ScheduleRow>& rows, const Scenario& scenario);

nlohmann::json to_json(Cell c);
nlohmann::json to_json(const Conflict& c);
nlohmann::json to_json(const PlanResult& result, std::span<const std::string> order);
nlohmann::json to_json(const ConflictStats& stats);
nlohmann::json to_json(const LayoutSuggestion& suggestion);

Cell cell_from_json(const nlohmann::json& j);

/// Parses "agent16:lag=2;agent3:immobile" into (agent, deviation) pairs.
std::vector<std::pair<std::string, Deviation>> parse_deviations(std::string_view spec);

/// Replan request: {"now": t, "positions": {id: [x,y]}, "deviations": {id: lag | "immobile"}}.
nlohmann::json replan_request(const ExecutionState& state);
/// Applies a replan request to a freshly started execution of `planned`.
ExecutionState state_from_request(const Scenario& scenario, const PlanResult& planned, const nlohmann::json& request);

}  // namespace sitepath
