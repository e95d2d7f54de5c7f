#include "sitepath/conflicts.hpp"

#include <algorithm>
#include <tuple>
#include <unordered_map>

namespace sitepath {

std::vector<Conflict> find_conflicts(std::span<const std::string> ids, std::span<const TimedPath* const> paths,
                                     std::size_t limit) {
    std::vector<Conflict> out;
    const std::size_t k = paths.size();
    if (k < 2) return out;
    int horizon = 0;
    for (const auto* p : paths) horizon = std::max(horizon, p->arrival_time());

    auto add = [&](ConflictKind kind, std::size_t i, std::size_t j, Cell a_from, Cell a_to, int t) {
        Conflict c;
        c.kind = kind;
        c.time = t;
        if (ids[i] < ids[j]) {
            c.agent_a = ids[i];
            c.agent_b = ids[j];
            c.location = a_from;
            c.location_b = a_to;
        } else {
            c.agent_a = ids[j];
            c.agent_b = ids[i];
            c.location = kind == ConflictKind::edge ? a_to : a_from;
            c.location_b = kind == ConflictKind::edge ? a_from : a_to;
        }
        out.push_back(std::move(c));
    };

    std::unordered_map<Cell, std::vector<std::size_t>, CellHash> occupancy;
    std::unordered_map<Cell, std::vector<std::size_t>, CellHash> next_occupancy;
    occupancy.reserve(k * 2);
    next_occupancy.reserve(k * 2);
    for (std::size_t i = 0; i < k; ++i) occupancy[paths[i]->at(0)].push_back(i);

    for (int t = 0; t <= horizon; ++t) {
        for (const auto& [cell, agents] : occupancy)
            for (std::size_t a = 0; a < agents.size(); ++a)
                for (std::size_t b = a + 1; b < agents.size(); ++b)
                    add(ConflictKind::vertex, agents[a], agents[b], cell, cell, t);
        if (t == horizon) break;
        next_occupancy.clear();
        for (std::size_t i = 0; i < k; ++i) next_occupancy[paths[i]->at(t + 1)].push_back(i);
        for (std::size_t i = 0; i < k; ++i) {
            const Cell from = paths[i]->at(t);
            const Cell to = paths[i]->at(t + 1);
            if (from == to) continue;
            auto it = occupancy.find(to);
            if (it == occupancy.end()) continue;
            for (std::size_t j : it->second)
                if (j > i && paths[j]->at(t + 1) == from) add(ConflictKind::edge, i, j, from, to, t);
        }
        std::swap(occupancy, next_occupancy);
        if (out.size() >= limit) break;
    }

    std::sort(out.begin(), out.end(), [](const Conflict& a, const Conflict& b) {
        return std::tie(a.time, a.agent_a, a.agent_b, a.kind, a.location, a.location_b) <
               std::tie(b.time, b.agent_a, b.agent_b, b.kind, b.location, b.location_b);
    });
    if (out.size() > limit) out.resize(limit);
    return out;
}

std::vector<Conflict> find_conflicts(const Schedule& schedule) {
    std::vector<std::string> ids;
    std::vector<const TimedPath*> paths;
    for (const auto& [id, path] : schedule) {
        ids.push_back(id);
        paths.push_back(&path);
    }
    return find_conflicts(ids, paths);
}

double sic(const Schedule& schedule) {
    double total = 0.0;
    for (const auto& [id, path] : schedule) total += path.cost();
    return total;
}

int makespan(const Schedule& schedule) {
    int m = 0;
    for (const auto& [id, path] : schedule) m = std::max(m, path.arrival_time());
    return m;
}

const char* to_string(ConflictKind kind) { return kind == ConflictKind::vertex ? "vertex" : "edge"; }
const char* to_string(ConflictPhase phase) { return phase == ConflictPhase::initial ? "initial" : "update"; }

}  // namespace sitepath
