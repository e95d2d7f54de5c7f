#include "sitepath/conflict_stats.hpp"

namespace sitepath {

EdgeKey make_edge_key(Cell a, Cell b) { return RowMajorLess{}(b, a) ? EdgeKey{b, a} : EdgeKey{a, b}; }

std::map<Cell, double, RowMajorLess> ConflictStats::vertex_counts() const {
    auto out = initial.vertex;
    for (const auto& [c, n] : update.vertex) out[c] += n;
    return out;
}

std::map<EdgeKey, double> ConflictStats::edge_counts() const {
    auto out = initial.edge;
    for (const auto& [e, n] : update.edge) out[e] += n;
    return out;
}

double ConflictStats::total_location_count() const {
    double total = 0.0;
    for (const auto* phase : {&initial, &update}) {
        for (const auto& [c, n] : phase->vertex) total += n;
        for (const auto& [e, n] : phase->edge) total += n;
    }
    return total;
}

bool ConflictStats::empty() const { return total_location_count() == 0.0; }

ConflictStats tally_conflicts(std::span<const Conflict> log) {
    ConflictStats stats;
    stats.runs = 1;
    for (const auto& c : log) {
        PhaseCounts& phase = c.phase == ConflictPhase::initial ? stats.initial : stats.update;
        if (c.kind == ConflictKind::vertex)
            phase.vertex[c.location] += 1.0;
        else
            phase.edge[make_edge_key(c.location, c.location_b)] += 1.0;
        for (const auto* id : {&c.agent_a, &c.agent_b}) {
            auto& counts = stats.per_agent[*id];
            (c.phase == ConflictPhase::initial ? counts.initial : counts.update) += 1.0;
        }
    }
    return stats;
}

ConflictStats average_stats(std::span<const ConflictStats> runs) {
    ConflictStats out;
    if (runs.empty()) return out;
    double weight_sum = 0.0;
    for (const auto& r : runs) {
        const double w = r.runs;
        weight_sum += w;
        auto merge = [w](PhaseCounts& dst, const PhaseCounts& src) {
            for (const auto& [c, n] : src.vertex) dst.vertex[c] += n * w;
            for (const auto& [e, n] : src.edge) dst.edge[e] += n * w;
        };
        merge(out.initial, r.initial);
        merge(out.update, r.update);
        for (const auto& [id, counts] : r.per_agent) {
            out.per_agent[id].initial += counts.initial * w;
            out.per_agent[id].update += counts.update * w;
        }
    }
    for (auto* phase : {&out.initial, &out.update}) {
        for (auto& [c, n] : phase->vertex) n /= weight_sum;
        for (auto& [e, n] : phase->edge) n /= weight_sum;
    }
    for (auto& [id, counts] : out.per_agent) {
        counts.initial /= weight_sum;
        counts.update /= weight_sum;
    }
    out.runs = static_cast<int>(weight_sum);
    return out;
}

}  // namespace sitepath
