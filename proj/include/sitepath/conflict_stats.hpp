#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>

#include "sitepath/conflicts.hpp"

namespace sitepath {

/// Undirected cell pair with the (y, x)-smaller cell first.
using EdgeKey = std::pair<Cell, Cell>;
EdgeKey make_edge_key(Cell a, Cell b);

struct AgentConflictCounts {
    double initial = 0.0;
    double update = 0.0;
    double total() const { return initial + update; }
};

struct PhaseCounts {
    std::map<Cell, double, RowMajorLess> vertex;
    std::map<EdgeKey, double> edge;
};

/// Conflict counts per location and per agent, averaged over `runs` solves.
/// Each conflict counts once at its location and once for each participant.
struct ConflictStats {
    PhaseCounts initial;
    PhaseCounts update;
    std::map<std::string, AgentConflictCounts> per_agent;
    int runs = 0;

    std::map<Cell, double, RowMajorLess> vertex_counts() const;
    std::map<EdgeKey, double> edge_counts() const;
    double total_location_count() const;
    bool empty() const;
};

/// Counts for a single conflict log (runs = 1).
ConflictStats tally_conflicts(std::span<const Conflict> log);

/// Mean of several single-run tallies.
ConflictStats average_stats(std::span<const ConflictStats> runs);

}  // namespace sitepath
