#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sitepath/conflict_stats.hpp"
#include "sitepath/conflicts.hpp"
#include "sitepath/grid_map.hpp"
#include "sitepath/low_level.hpp"

namespace sitepath {

/// What the high level does once the conflict threshold or the deadline is hit.
enum class Strategy {
    remove,     ///< drop the agents involved in most conflicts and search again
    same_dir,   ///< agents sharing the dominant movement direction move first
    subregion,  ///< one random agent per independent sub-region moves first
    low_cost,   ///< cheapest unconstrained paths move first
};

std::string_view to_string(Strategy s);
Strategy parse_strategy(std::string_view name);

enum class PlanStatus { optimal, feasible_after_removal, stop_all };
std::string_view to_string(PlanStatus s);

inline constexpr double kDefaultDeadlineS = 5.0;
inline constexpr int kDefaultConflictThreshold = 64;
/// Fraction of the deadline after which the constraint-tree search yields to
/// the fallback stage; the remainder is the fallback's budget.
inline constexpr double kFallbackStartFraction = 0.8;

struct Scenario {
    WeightedGridMap map;
    std::vector<Agent> agents;
    double deadline_s = kDefaultDeadlineS;
    int conflict_threshold = kDefaultConflictThreshold;
    Strategy strategy = Strategy::remove;
    std::uint64_t seed = 0;
    /// Time-expansion horizon for replanning; <= 0 selects default_horizon.
    int horizon = 0;
    /// When false, hitting the threshold or the deadline yields stop_all directly.
    bool fallback_enabled = true;
};

/// Throws std::invalid_argument unless ids are unique, starts and goals are
/// pairwise distinct and passable, and priorities are positive.
void validate_scenario(const Scenario& scenario);

class UnsolvableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Constraint-tree node. Constraints are shared with ancestors through the
/// parent chain; paths are indexed like the agent list being searched.
struct CTNode {
    std::shared_ptr<const CTNode> parent;
    std::optional<Constraint> added;
    std::vector<std::shared_ptr<const TimedPath>> paths;
    /// Sum of priority-weighted path costs, in cost units.
    double cost = 0.0;
    std::size_t conflict_count = 0;
    std::optional<Conflict> first_conflict;
    std::size_t depth = 0;

    std::vector<Constraint> constraints() const;
    std::vector<Constraint> constraints_for(std::string_view agent) const;
};

struct PlanResult {
    Schedule schedule;
    double total_cost = 0.0;
    /// Agents ordered to wait at their start (removed or deferred).
    std::vector<std::string> removed_agents;
    std::vector<Conflict> conflict_log;
    double elapsed_initial_s = 0.0;
    double elapsed_update_s = 0.0;
    PlanStatus status = PlanStatus::optimal;
    std::size_t expanded_nodes = 0;
    std::size_t generated_nodes = 0;
    bool fallback_used = false;
};

/// Ordering produced by a fallback strategy: `order` lists the agents that
/// keep moving (earlier = planned first), `deferred` those told to wait.
struct AdmissionPlan {
    std::vector<std::string> order;
    std::vector<std::string> deferred;
};

/// Applies one of the four fallback strategies. `node` supplies the agents'
/// current paths (for envelopes and costs), `excluded` agents are already
/// out of play, and `remove_count` is how many agents strategy remove drops.
AdmissionPlan apply_fallback(const std::vector<Agent>& agents, const CTNode& node, const ConflictStats& stats,
                             Strategy strategy, std::mt19937_64& rng, std::span<const std::string> excluded = {},
                             std::size_t remove_count = 1);

/// Dominant movement direction of an agent: 0 +x, 1 -x, 2 +y, 3 -y, 4 none.
int dominant_direction(const Agent& agent);

struct SolveObserver {
    /// Called for every generated child with its parent.
    std::function<void(const CTNode& parent, const CTNode& child)> on_child;
};

/// Realtime conflict-based search: bidirectional initial proposals, best-first
/// constraint-tree search, and the configured fallback under pressure.
/// Throws UnsolvableError if an agent cannot reach its goal on the empty map.
PlanResult solve(const Scenario& scenario, const SolveObserver* observer = nullptr);

/// Schedule telling every agent to wait at its start.
Schedule stop_all_schedule(const std::vector<Agent>& agents);

/// Plans agents one at a time in `order`, each avoiding the paths already
/// planned. Agents that cannot be planned are deferred (they wait at their
/// start, which becomes blocked for everyone else) and planning restarts.
/// Returns nullopt if the deadline expires first.
struct SequentialPlan {
    Schedule schedule;
    std::vector<std::string> deferred;
};
std::optional<SequentialPlan> plan_in_order(const WeightedGridMap& map, const std::vector<Agent>& agents,
                                            std::span<const std::string> order,
                                            std::span<const std::string> deferred, int horizon,
                                            const Deadline& deadline);

}  // namespace sitepath
