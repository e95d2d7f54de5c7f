#include "sitepath/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace sitepath {

ConflictStats collect_stats(const Scenario& scenario, int repetitions, std::vector<PlanResult>* runs) {
    if (repetitions < 1) throw std::invalid_argument("repetitions must be at least 1");
    std::vector<ConflictStats> tallies;
    tallies.reserve(static_cast<std::size_t>(repetitions));
    Scenario sc = scenario;
    for (int r = 0; r < repetitions; ++r) {
        sc.seed = scenario.seed + static_cast<std::uint64_t>(r);
        PlanResult result = solve(sc);
        tallies.push_back(tally_conflicts(result.conflict_log));
        if (runs) runs->push_back(std::move(result));
    }
    ConflictStats stats = average_stats(tallies);
    for (const auto& a : scenario.agents) stats.per_agent.try_emplace(a.id);
    return stats;
}

std::vector<Cell> LayoutSuggestion::cells() const {
    std::vector<Cell> out;
    for (const auto& c : changes) out.push_back(c.cell);
    return out;
}

namespace {

using CellCounts = std::map<Cell, double, RowMajorLess>;

CellCounts location_counts(const ConflictStats& stats) {
    CellCounts counts = stats.vertex_counts();
    for (const auto& [edge, n] : stats.edge_counts()) {
        counts[edge.first] += n;
        counts[edge.second] += n;
    }
    std::erase_if(counts, [](const auto& kv) { return kv.second <= 0.0; });
    return counts;
}

double modal_value(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double best = values.front();
    std::size_t best_run = 0;
    for (std::size_t i = 0; i < values.size();) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        if (j - i > best_run) {
            best_run = j - i;
            best = values[i];
        }
        i = j;
    }
    return best;
}

}  // namespace

LayoutSuggestion suggest_layout(const WeightedGridMap& map, const ConflictStats& stats, std::size_t k) {
    LayoutSuggestion suggestion;
    const CellCounts counts = location_counts(stats);
    if (counts.empty() || k == 0) return suggestion;

    std::vector<double> sorted;
    for (const auto& [c, n] : counts) sorted.push_back(n);
    std::sort(sorted.begin(), sorted.end());
    const auto rank = static_cast<std::size_t>(std::ceil(kHotspotPercentile * static_cast<double>(sorted.size())));
    const double threshold = sorted[std::max<std::size_t>(rank, 1) - 1];

    std::set<Cell, RowMajorLess> hot;
    for (const auto& [c, n] : counts)
        if (n >= threshold) hot.insert(c);

    std::set<Cell, RowMajorLess> seen;
    std::vector<Hotspot> clusters;
    for (Cell seed : hot) {
        if (seen.contains(seed)) continue;
        Hotspot h;
        std::vector<Cell> stack{seed};
        seen.insert(seed);
        while (!stack.empty()) {
            Cell c = stack.back();
            stack.pop_back();
            h.cells.push_back(c);
            h.count += counts.at(c);
            for (Cell n : {Cell{c.x + 1, c.y}, Cell{c.x - 1, c.y}, Cell{c.x, c.y + 1}, Cell{c.x, c.y - 1}})
                if (hot.contains(n) && seen.insert(n).second) stack.push_back(n);
        }
        std::sort(h.cells.begin(), h.cells.end(), RowMajorLess{});
        clusters.push_back(std::move(h));
    }
    std::stable_sort(clusters.begin(), clusters.end(),
                     [](const Hotspot& a, const Hotspot& b) { return a.count > b.count; });

    // Take the k hottest clusters that admit a change; uniform open ground has nothing to modify.
    const std::size_t layers = map.layers().size();
    std::set<Cell, RowMajorLess> proposed;
    std::vector<Hotspot> used;
    for (auto& cluster : clusters) {
        if (used.size() == k) break;
        const std::size_t ci = used.size();
        const std::size_t before = suggestion.changes.size();
        const std::set<Cell, RowMajorLess> members(cluster.cells.begin(), cluster.cells.end());

        // Modal terrain of the 8-neighbourhood ring around the cluster.
        std::set<Cell, RowMajorLess> ring;
        for (Cell c : cluster.cells)
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    Cell n{c.x + dx, c.y + dy};
                    if (map.in_bounds(n) && !members.contains(n) && map.is_passable(n)) ring.insert(n);
                }
        if (ring.empty()) continue;
        std::vector<double> modal(layers);
        for (std::size_t l = 0; l < layers; ++l) {
            std::vector<double> values;
            for (Cell c : ring) values.push_back(map.layers()[l].weights[static_cast<std::size_t>(map.index(c))]);
            modal[l] = modal_value(std::move(values));
        }
        double modal_cost = 0.0;
        for (std::size_t l = 0; l < layers; ++l) modal_cost += map.layers()[l].layer_weight * modal[l];

        std::set<Cell, RowMajorLess> nearby;
        for (Cell c : cluster.cells)
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx) {
                    Cell n{c.x + dx, c.y + dy};
                    const int d = std::abs(dx) + std::abs(dy);
                    if (d >= 1 && d <= 2 && map.in_bounds(n) && !members.contains(n)) nearby.insert(n);
                }
        for (Cell c : nearby) {
            if (proposed.contains(c)) continue;
            bool take = false;
            if (!map.is_passable(c)) {
                // Only blocked cells that would open a passage between free cells.
                int open_sides = 0;
                for (Cell n : {Cell{c.x + 1, c.y}, Cell{c.x - 1, c.y}, Cell{c.x, c.y + 1}, Cell{c.x, c.y - 1}})
                    if (map.in_bounds(n) && map.is_passable(n)) ++open_sides;
                take = open_sides >= 2;
            } else {
                double terrain = 0.0;
                for (std::size_t l = 0; l < layers; ++l)
                    terrain += map.layers()[l].layer_weight * map.layers()[l].weights[static_cast<std::size_t>(map.index(c))];
                take = terrain > modal_cost;
            }
            if (!take) continue;
            proposed.insert(c);
            suggestion.changes.push_back({c, modal, !map.is_passable(c), ci});
        }
        if (suggestion.changes.size() > before) used.push_back(std::move(cluster));
    }
    suggestion.hotspots = std::move(used);
    return suggestion;
}

WeightedGridMap apply_layout(const WeightedGridMap& map, const LayoutSuggestion& suggestion) {
    WeightedGridMap out = map;
    for (const auto& change : suggestion.changes) out = out.with_cell_values(change.cell, change.values);
    return out;
}

std::vector<std::string> suggest_removal(const ConflictStats& stats, std::size_t k) {
    std::vector<std::pair<std::string, double>> ranked;
    for (const auto& [id, counts] : stats.per_agent)
        if (counts.total() > 0.0) ranked.emplace_back(id, counts.total());
    std::stable_sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.push_back(ranked[i].first);
    return out;
}

}  // namespace sitepath
