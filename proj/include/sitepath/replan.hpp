#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "sitepath/cbs.hpp"

namespace sitepath {

/// How far an agent has fallen behind its plan.
struct Deviation {
    int lag = 0;
    bool immobile = false;

    friend bool operator==(const Deviation&, const Deviation&) = default;
};

/// Snapshot of a running plan. `scenario` is the one `planned` was solved for;
/// `positions` holds the actual cell of every agent at timestep `now`.
struct ExecutionState {
    Scenario scenario;
    PlanResult planned;
    int now = 0;
    std::map<std::string, Cell> positions;
    std::map<std::string, Deviation> deviations;
};

/// State at timestep `now` with every agent exactly on schedule.
ExecutionState begin_execution(const Scenario& scenario, const PlanResult& planned, int now);

/// Throws std::invalid_argument unless positions are pairwise distinct,
/// passable and cover every agent, and lags are nonnegative.
void validate_state(const ExecutionState& state);

/// Moves `agent` back to its planned cell at max(0, now - lag), or freezes it
/// where it is when `deviation.immobile`. Throws std::invalid_argument for an
/// unknown agent, a lag below 1, or a position already held by another agent.
ExecutionState inject_delay(const ExecutionState& state, const std::string& agent, Deviation deviation);

class NoMidwayError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Substitute destination for a mobile deviant. Candidates are passable cells
/// that lie on no other agent's remaining path (goal-stay included) and whose
/// blocking leaves every other mobile agent connected to its goal. Among them
/// the agent prefers, in order: entering the fewest cells of other agents'
/// remaining paths on the way, the smallest cost of the detour via the cell to
/// its goal, the smallest remaining cost from the cell, then lower (y, x).
/// `map` should already block immobile agents. Throws NoMidwayError.
Cell midway_goal(const WeightedGridMap& map, const ExecutionState& state, const std::string& agent);

struct ReplanResult {
    /// Schedule from timestep `now` onwards (index 0 = current positions).
    PlanResult plan;
    std::map<std::string, Cell> midway_goals;
    /// Agents whose path differs from the remaining suffix of the old plan.
    std::vector<std::string> changed_agents;
    std::vector<std::string> troublemakers;
    bool stop_all = false;
};

/// Remaining part of each planned path from timestep `now`.
Schedule plan_suffix(const Schedule& schedule, const WeightedGridMap& map, int now);

/// Replans the fleet from the current positions. Without deviations the
/// remaining suffix of the plan is returned unchanged. Immobile agents become
/// obstacles; if one cuts another agent off from its goal the result is
/// stop_all. Otherwise the fleet is solved without fallback; if that fails, a
/// delayed agent whose removal lets the rest solve within half the deadline
/// gets a midway goal and the fleet is solved again.
ReplanResult replan(const ExecutionState& state, double deadline_s);

}  // namespace sitepath
