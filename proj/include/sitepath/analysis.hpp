#pragma once

#include <string>
#include <vector>

#include "sitepath/cbs.hpp"
#include "sitepath/conflict_stats.hpp"

namespace sitepath {

/// Solves the scenario `repetitions` times with seeds seed, seed+1, ... and
/// averages the conflict counts. Completed runs are appended to `runs`.
ConflictStats collect_stats(const Scenario& scenario, int repetitions, std::vector<PlanResult>* runs = nullptr);

/// Connected group of high-count cells.
struct Hotspot {
    std::vector<Cell> cells;
    double count = 0.0;
};

/// One proposed terrain change: set `cell` to `values` (one per layer).
struct LayoutChange {
    Cell cell;
    std::vector<double> values;
    bool was_obstacle = false;
    std::size_t hotspot = 0;
};

struct LayoutSuggestion {
    std::string target = "match surrounding terrain";
    std::vector<Hotspot> hotspots;
    std::vector<LayoutChange> changes;

    std::vector<Cell> cells() const;
    bool empty() const { return changes.empty(); }
};

/// Percentile of nonzero location counts a cell must reach to be a hotspot.
inline constexpr double kHotspotPercentile = 0.9;

/// Finds the `k` strongest hotspot clusters (combined vertex counts plus edge
/// counts credited to both endpoints; cells at or above the 90th percentile
/// of nonzero counts, 4-connected) and proposes bringing nearby costlier or
/// blocking cells to the modal terrain around each cluster.
LayoutSuggestion suggest_layout(const WeightedGridMap& map, const ConflictStats& stats, std::size_t k);

WeightedGridMap apply_layout(const WeightedGridMap& map, const LayoutSuggestion& suggestion);

/// The `k` agents with the largest total conflict count (ties by id); agents
/// without conflicts are never returned.
std::vector<std::string> suggest_removal(const ConflictStats& stats, std::size_t k);

}  // namespace sitepath
