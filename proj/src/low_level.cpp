#include "sitepath/low_level.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>

namespace sitepath {

namespace {

constexpr CostUnits kInf = std::numeric_limits<CostUnits>::max() / 4;
constexpr std::size_t kDeadlineCheckInterval = 1024;

// Open-list entry; ordered by key, then heuristic, then insertion order.
struct OpenEntry {
    CostUnits key;
    CostUnits h;
    std::uint64_t seq;
    int state;
};

struct OpenGreater {
    bool operator()(const OpenEntry& a, const OpenEntry& b) const {
        return std::tie(a.key, a.h, a.seq) > std::tie(b.key, b.h, b.seq);
    }
};

using OpenList = std::priority_queue<OpenEntry, std::vector<OpenEntry>, OpenGreater>;

}  // namespace

ConstraintTable::ConstraintTable(const WeightedGridMap& map, std::span<const Constraint> constraints)
    : ConstraintTable(map.cell_count()) {
    for (const auto& c : constraints) add(map, c);
}

void ConstraintTable::block_vertex(int cell, int t) {
    vertex_.insert(vkey(cell, t));
    auto& last = last_block_[static_cast<std::size_t>(cell)];
    last = std::max(last, t);
    latest_time_ = std::max(latest_time_, t);
}

void ConstraintTable::block_move(int from, int to, int arrival_t) {
    moves_.insert(vkey(from, arrival_t) * static_cast<std::uint64_t>(cell_count_) + static_cast<std::uint64_t>(to));
    latest_time_ = std::max(latest_time_, arrival_t);
}

void ConstraintTable::block_from(int cell, int t) {
    auto& p = permanent_from_[static_cast<std::size_t>(cell)];
    if (p == kNever) ++permanent_count_;
    p = (p == kNever) ? t : std::min(p, t);
    latest_time_ = std::max(latest_time_, t);
}

void ConstraintTable::add(const WeightedGridMap& map, const Constraint& c) {
    if (!map.in_bounds(c.vertex) || (c.from && !map.in_bounds(*c.from)))
        throw std::invalid_argument("constraint outside map bounds");
    if (c.time < 0) throw std::invalid_argument("constraint time must be nonnegative");
    if (c.from)
        block_move(map.index(*c.from), map.index(c.vertex), c.time);
    else
        block_vertex(map.index(c.vertex), c.time);
}

bool ConstraintTable::vertex_blocked(int cell, int t) const {
    const int p = permanent_from_[static_cast<std::size_t>(cell)];
    if (p != kNever && t >= p) return true;
    if (t > last_block_[static_cast<std::size_t>(cell)]) return false;
    return vertex_.contains(vkey(cell, t));
}

bool ConstraintTable::move_blocked(int from, int to, int arrival_t) const {
    if (moves_.empty()) return false;
    return moves_.contains(vkey(from, arrival_t) * static_cast<std::uint64_t>(cell_count_) + static_cast<std::uint64_t>(to));
}

int ConstraintTable::last_block_time(int cell) const {
    if (permanent_from_[static_cast<std::size_t>(cell)] != kNever) return kForever;
    return last_block_[static_cast<std::size_t>(cell)];
}

CostUnits heuristic(const WeightedGridMap& map, Cell c, Cell goal) {
    return static_cast<CostUnits>(manhattan(c, goal)) * map.min_cell_cost_units();
}

BalancedHeuristic balanced_heuristics(const WeightedGridMap& map, Cell c, Cell start, Cell goal) {
    const CostUnits pi_f = heuristic(map, c, goal);
    const CostUnits pi_r = heuristic(map, c, start);
    const double h_f = from_units(pi_f - pi_r) / 2.0;
    return {h_f, -h_f};
}

CostUnits path_base_cost(const WeightedGridMap& map, std::span<const Cell> cells) {
    if (cells.empty()) throw std::invalid_argument("empty path");
    CostUnits total = 0;
    for (std::size_t t = 0; t < cells.size(); ++t) {
        if (!map.in_bounds(cells[t]) || !map.is_passable(cells[t]))
            throw std::invalid_argument("path visits an impassable cell");
        if (t == 0) continue;
        if (manhattan(cells[t - 1], cells[t]) > 1) throw std::invalid_argument("path makes a non-adjacent step");
        total += map.cell_cost_units(cells[t]);
    }
    return total;
}

TimedPath bidirectional_astar(const WeightedGridMap& map, Cell start, Cell goal, BidirectionalStats* stats) {
    if (!map.is_passable(start) || !map.is_passable(goal))
        throw std::invalid_argument("start and goal must be passable");
    if (start == goal) return TimedPath{{start}, 0, 1.0};

    const auto n = static_cast<std::size_t>(map.cell_count());
    const int s = map.index(start);
    const int z = map.index(goal);

    // Potentials are kept doubled so the balanced average stays integral:
    // key_f = 2 g_f + (pi_f - pi_r), key_r = 2 g_r + (pi_r - pi_f).
    std::vector<CostUnits> pot(n);
    for (std::size_t i = 0; i < n; ++i) {
        Cell c = map.cell_at(static_cast<int>(i));
        pot[i] = heuristic(map, c, goal) - heuristic(map, c, start);
    }

    std::vector<CostUnits> dist_f(n, kInf), dist_r(n, kInf);
    std::vector<int> parent_f(n, -1), parent_r(n, -1);
    std::vector<char> closed_f(n, 0), closed_r(n, 0);
    std::vector<int> touched;
    OpenList open_f, open_r;
    std::uint64_t seq = 0;

    dist_f[static_cast<std::size_t>(s)] = 0;
    dist_r[static_cast<std::size_t>(z)] = 0;
    touched.push_back(s);
    touched.push_back(z);
    open_f.push({pot[static_cast<std::size_t>(s)], pot[static_cast<std::size_t>(s)], seq++, s});
    open_r.push({-pot[static_cast<std::size_t>(z)], -pot[static_cast<std::size_t>(z)], seq++, z});

    CostUnits best = kInf;
    auto settle_top = [](OpenList& open, const std::vector<CostUnits>& dist, const std::vector<char>& closed,
                         const std::vector<CostUnits>& potential, int sign) {
        while (!open.empty()) {
            const auto& top = open.top();
            const auto i = static_cast<std::size_t>(top.state);
            if (!closed[i] && top.key == 2 * dist[i] + sign * potential[i]) return true;
            open.pop();
        }
        return false;
    };

    while (true) {
        if (!settle_top(open_f, dist_f, closed_f, pot, 1) || !settle_top(open_r, dist_r, closed_r, pot, -1)) break;
        if (best < kInf && open_f.top().key + open_r.top().key >= 2 * best) break;

        // Forward step: relax edges v -> u, each costing the entered cell.
        {
            const int v = open_f.top().state;
            open_f.pop();
            closed_f[static_cast<std::size_t>(v)] = 1;
            if (stats) ++stats->forward_expansions;
            for (Cell uc : map.neighbors(map.cell_at(v))) {
                const int u = map.index(uc);
                if (u == v) continue;
                const auto ui = static_cast<std::size_t>(u);
                const CostUnits tentative = dist_f[static_cast<std::size_t>(v)] + map.cell_cost_units(u);
                if (tentative < dist_f[ui]) {
                    if (dist_f[ui] == kInf && dist_r[ui] == kInf) touched.push_back(u);
                    dist_f[ui] = tentative;
                    parent_f[ui] = v;
                    open_f.push({2 * tentative + pot[ui], pot[ui], seq++, u});
                }
                if (dist_r[ui] < kInf) best = std::min(best, dist_f[ui] + dist_r[ui]);
            }
        }

        if (!settle_top(open_f, dist_f, closed_f, pot, 1) || !settle_top(open_r, dist_r, closed_r, pot, -1)) break;
        if (best < kInf && open_f.top().key + open_r.top().key >= 2 * best) break;

        // Backward step over the reversed graph: u -> w costs the cell w.
        {
            const int w = open_r.top().state;
            open_r.pop();
            closed_r[static_cast<std::size_t>(w)] = 1;
            if (stats) ++stats->backward_expansions;
            const CostUnits step = map.cell_cost_units(w);
            for (Cell uc : map.neighbors(map.cell_at(w))) {
                const int u = map.index(uc);
                if (u == w) continue;
                const auto ui = static_cast<std::size_t>(u);
                const CostUnits tentative = dist_r[static_cast<std::size_t>(w)] + step;
                if (tentative < dist_r[ui]) {
                    if (dist_f[ui] == kInf && dist_r[ui] == kInf) touched.push_back(u);
                    dist_r[ui] = tentative;
                    parent_r[ui] = w;
                    open_r.push({2 * tentative - pot[ui], -pot[ui], seq++, u});
                }
                if (dist_f[ui] < kInf) best = std::min(best, dist_f[ui] + dist_r[ui]);
            }
        }
    }

    // Meeting-cell minimisation over every cell labelled by both searches.
    CostUnits distance = kInf;
    int meet = -1;
    std::sort(touched.begin(), touched.end());
    for (int u : touched) {
        const auto ui = static_cast<std::size_t>(u);
        if (dist_f[ui] == kInf || dist_r[ui] == kInf) continue;
        if (dist_f[ui] + dist_r[ui] < distance) {
            distance = dist_f[ui] + dist_r[ui];
            meet = u;
        }
    }
    if (meet < 0) throw UnreachableError("goal unreachable from start");

    TimedPath path;
    for (int cur = meet; cur != -1; cur = parent_f[static_cast<std::size_t>(cur)]) path.cells.push_back(map.cell_at(cur));
    std::reverse(path.cells.begin(), path.cells.end());
    for (int cur = parent_r[static_cast<std::size_t>(meet)]; cur != -1; cur = parent_r[static_cast<std::size_t>(cur)])
        path.cells.push_back(map.cell_at(cur));
    path.base_cost = distance;
    path.priority = 1.0;
    return path;
}

int default_horizon(const WeightedGridMap& map) { return 4 * (map.width() + map.height()); }

std::optional<TimedPath> try_constrained_astar(const WeightedGridMap& map, const Agent& agent,
                                               const ConstraintTable& table, int horizon, const Deadline* deadline) {
    if (!map.is_passable(agent.start) || !map.is_passable(agent.goal))
        throw std::invalid_argument("agent '" + agent.id + "' start and goal must be passable");
    if (!(agent.priority > 0.0)) throw std::invalid_argument("agent priority must be positive");

    const int n = map.cell_count();
    if (horizon <= 0) horizon = default_horizon(map);
    horizon = std::max(horizon, table.latest_time() + map.width() + map.height());

    const int s = map.index(agent.start);
    const int z = map.index(agent.goal);
    if (table.vertex_blocked(s, 0)) return std::nullopt;
    const int goal_free_after = table.last_block_time(z);
    if (goal_free_after == ConstraintTable::kForever) return std::nullopt;

    const auto states = static_cast<std::size_t>(horizon + 1) * static_cast<std::size_t>(n);
    std::vector<CostUnits> g(states, kInf);
    std::vector<int> parent(states, -1);
    std::vector<char> closed(states, 0);
    OpenList open;
    std::uint64_t seq = 0;
    const CostUnits step_min = map.min_cell_cost_units();
    auto h_of = [&](int cell) { return static_cast<CostUnits>(manhattan(map.cell_at(cell), agent.goal)) * step_min; };

    g[static_cast<std::size_t>(s)] = 0;
    open.push({h_of(s), h_of(s), seq++, s});
    std::size_t expansions = 0;

    while (!open.empty()) {
        const OpenEntry top = open.top();
        open.pop();
        const auto si = static_cast<std::size_t>(top.state);
        if (closed[si]) continue;
        closed[si] = 1;
        const int t = top.state / n;
        const int cell = top.state % n;

        if (cell == z && t > goal_free_after) {
            TimedPath path;
            for (int cur = top.state; cur != -1; cur = parent[static_cast<std::size_t>(cur)])
                path.cells.push_back(map.cell_at(cur % n));
            std::reverse(path.cells.begin(), path.cells.end());
            path.base_cost = g[si];
            path.priority = agent.priority;
            return path;
        }
        if (deadline && expansions++ % kDeadlineCheckInterval == 0 && deadline->expired()) throw DeadlineExceeded();
        if (t >= horizon) continue;

        for (Cell nc : map.neighbors(map.cell_at(cell))) {
            const int next = map.index(nc);
            if (table.vertex_blocked(next, t + 1) || table.move_blocked(cell, next, t + 1)) continue;
            const int ns = (t + 1) * n + next;
            const auto nsi = static_cast<std::size_t>(ns);
            if (closed[nsi]) continue;
            const CostUnits tentative = g[si] + map.cell_cost_units(next);
            if (tentative < g[nsi]) {
                g[nsi] = tentative;
                parent[nsi] = top.state;
                const CostUnits h = h_of(next);
                open.push({tentative + h, h, seq++, ns});
            }
        }
    }
    return std::nullopt;
}

TimedPath constrained_astar(const WeightedGridMap& map, const Agent& agent, const ConstraintTable& table, int horizon,
                            const Deadline* deadline) {
    auto path = try_constrained_astar(map, agent, table, horizon, deadline);
    if (!path) throw UnreachableError("agent '" + agent.id + "' cannot reach its goal within the horizon");
    return std::move(*path);
}

TimedPath constrained_astar(const WeightedGridMap& map, const Agent& agent, std::span<const Constraint> constraints,
                            int horizon, const Deadline* deadline) {
    ConstraintTable table(map, constraints);
    return constrained_astar(map, agent, table, horizon, deadline);
}

std::vector<CostUnits> cost_to_all(const WeightedGridMap& map, Cell source) {
    const auto n = static_cast<std::size_t>(map.cell_count());
    std::vector<CostUnits> dist(n, kInf);
    if (!map.is_passable(source)) throw std::invalid_argument("source must be passable");
    using Item = std::pair<CostUnits, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    dist[static_cast<std::size_t>(map.index(source))] = 0;
    open.push({0, map.index(source)});
    while (!open.empty()) {
        auto [d, v] = open.top();
        open.pop();
        if (d != dist[static_cast<std::size_t>(v)]) continue;
        for (Cell uc : map.neighbors(map.cell_at(v))) {
            const int u = map.index(uc);
            const CostUnits nd = d + map.cell_cost_units(u);
            if (u != v && nd < dist[static_cast<std::size_t>(u)]) {
                dist[static_cast<std::size_t>(u)] = nd;
                open.push({nd, u});
            }
        }
    }
    for (auto& d : dist)
        if (d == kInf) d = -1;
    return dist;
}

}  // namespace sitepath
