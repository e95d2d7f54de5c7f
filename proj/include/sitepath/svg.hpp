#pragma once

#include <map>
#include <string>

#include "sitepath/conflict_stats.hpp"
#include "sitepath/conflicts.hpp"
#include "sitepath/grid_map.hpp"

namespace sitepath {

/// Cell heatmap; opacity is linear from 0 to the largest count.
std::string vertex_heatmap_svg(const WeightedGridMap& map, const std::map<Cell, double, RowMajorLess>& counts,
                               const std::string& title);

/// Edge heatmap; each counted edge is a segment between cell centres.
std::string edge_heatmap_svg(const WeightedGridMap& map, const std::map<EdgeKey, double>& counts,
                             const std::string& title);

/// Map with each agent's path drawn as a polyline from start to goal.
std::string paths_svg(const WeightedGridMap& map, const Schedule& schedule, const std::string& title);

}  // namespace sitepath
