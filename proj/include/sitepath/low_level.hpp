#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "sitepath/deadline.hpp"
#include "sitepath/grid_map.hpp"

namespace sitepath {

struct Agent {
    std::string id;
    Cell start;
    Cell goal;
    /// Soft priority: a multiplier on every step cost of this agent.
    double priority = 1.0;
};

/// Cell sequence indexed by timestep. After the last cell the agent is taken
/// to stay there (goal-stay occupancy) at no further cost.
struct TimedPath {
    std::vector<Cell> cells;
    /// Sum of fixed-point cell costs over cells[1..T] (waits included).
    CostUnits base_cost = 0;
    double priority = 1.0;

    double cost() const { return priority * from_units(base_cost); }
    /// Priority-weighted cost in cost units; the quantity summed by SIC.
    double weighted_units() const { return priority * static_cast<double>(base_cost); }
    int arrival_time() const { return static_cast<int>(cells.size()) - 1; }
    Cell at(int t) const { return t < static_cast<int>(cells.size()) ? cells[static_cast<std::size_t>(t)] : cells.back(); }
};

/// Forbids `agent` from occupying `vertex` at `time`. When `from` is set the
/// constraint instead forbids the single move from -> vertex arriving at `time`.
struct Constraint {
    std::string agent;
    Cell vertex;
    int time = 0;
    std::optional<Cell> from;

    friend bool operator==(const Constraint&, const Constraint&) = default;
};

class UnreachableError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Blocked space-time states for one agent's search: vertex blocks, move
/// blocks, and cells that stay blocked from some time onwards.
class ConstraintTable {
public:
    explicit ConstraintTable(int cell_count) : cell_count_(cell_count), last_block_(static_cast<std::size_t>(cell_count), -1),
                                               permanent_from_(static_cast<std::size_t>(cell_count), kNever) {}

    ConstraintTable(const WeightedGridMap& map, std::span<const Constraint> constraints);

    void block_vertex(int cell, int t);
    void block_move(int from, int to, int arrival_t);
    void block_from(int cell, int t);
    void add(const WeightedGridMap& map, const Constraint& c);

    bool vertex_blocked(int cell, int t) const;
    bool move_blocked(int from, int to, int arrival_t) const;
    /// Latest time the cell is blocked; kNever if never, kForever if permanently.
    int last_block_time(int cell) const;
    /// Largest finite time mentioned by any block.
    int latest_time() const { return latest_time_; }
    bool empty() const { return vertex_.empty() && moves_.empty() && permanent_count_ == 0; }

    static constexpr int kNever = -1;
    static constexpr int kForever = 1 << 30;

private:
    std::uint64_t vkey(int cell, int t) const { return static_cast<std::uint64_t>(t) * static_cast<std::uint64_t>(cell_count_) + static_cast<std::uint64_t>(cell); }

    int cell_count_;
    std::unordered_set<std::uint64_t> vertex_;
    std::unordered_set<std::uint64_t> moves_;
    std::vector<int> last_block_;
    std::vector<int> permanent_from_;
    int permanent_count_ = 0;
    int latest_time_ = 0;
};

/// Manhattan distance scaled by the map's cheapest passable cell; admissible
/// and consistent for unit-priority step costs.
CostUnits heuristic(const WeightedGridMap& map, Cell c, Cell goal);

struct BalancedHeuristic {
    double forward = 0.0;
    double reverse = 0.0;
};

/// h_f = (pi_f - pi_r) / 2 and h_r = -h_f, with pi_f towards the goal and
/// pi_r towards the start. Values in cost (not fixed-point) units.
BalancedHeuristic balanced_heuristics(const WeightedGridMap& map, Cell c, Cell start, Cell goal);

struct BidirectionalStats {
    std::size_t forward_expansions = 0;
    std::size_t backward_expansions = 0;
};

/// Minimum-cost start->goal path ignoring time and other agents. Forward and
/// backward searches share the balanced potential; afterwards the meeting
/// cell minimising dist + dist_reverse is selected. Throws UnreachableError.
TimedPath bidirectional_astar(const WeightedGridMap& map, Cell start, Cell goal, BidirectionalStats* stats = nullptr);

int default_horizon(const WeightedGridMap& map);

/// Time-expanded A* (moves: four neighbours + wait). Every step, waits
/// included, costs the destination cell; the returned path avoids every block in
/// `table` and may end at the goal only once the goal is never blocked again.
/// `horizon` <= 0 selects default_horizon; the horizon is always extended past
/// the latest finite block time. Throws UnreachableError or DeadlineExceeded.
TimedPath constrained_astar(const WeightedGridMap& map, const Agent& agent, const ConstraintTable& table,
                            int horizon = 0, const Deadline* deadline = nullptr);

TimedPath constrained_astar(const WeightedGridMap& map, const Agent& agent, std::span<const Constraint> constraints,
                            int horizon = 0, const Deadline* deadline = nullptr);

/// As constrained_astar but returns nullopt instead of throwing UnreachableError.
std::optional<TimedPath> try_constrained_astar(const WeightedGridMap& map, const Agent& agent,
                                               const ConstraintTable& table, int horizon = 0,
                                               const Deadline* deadline = nullptr);

/// Recomputes the fixed-point cost of a cell sequence; throws
/// std::invalid_argument on impassable cells or non-adjacent steps.
CostUnits path_base_cost(const WeightedGridMap& map, std::span<const Cell> cells);

/// Single-source costs: result[index] = cheapest cost of a path from `source`
/// ending at that cell (-1 if unreachable). Used by replanning diagnostics.
std::vector<CostUnits> cost_to_all(const WeightedGridMap& map, Cell source);

}  // namespace sitepath
