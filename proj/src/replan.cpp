#include "sitepath/replan.hpp"

#include <algorithm>
#include <limits>
#include <optional>
#include <queue>
#include <set>
#include <tuple>

namespace sitepath {

namespace {

const Agent& find_agent(const Scenario& sc, const std::string& id) {
    for (const auto& a : sc.agents)
        if (a.id == id) return a;
    throw std::invalid_argument("unknown agent '" + id + "'");
}

bool connected(const WeightedGridMap& map, Cell from, Cell to, int blocked = -1) {
    if (!map.is_passable(from) || !map.is_passable(to)) return false;
    if (map.index(from) == blocked || map.index(to) == blocked) return false;
    std::vector<char> seen(static_cast<std::size_t>(map.cell_count()), 0);
    std::vector<Cell> stack{from};
    seen[static_cast<std::size_t>(map.index(from))] = 1;
    while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        if (c == to) return true;
        for (Cell n : map.neighbors(c)) {
            const int i = map.index(n);
            if (i == blocked || seen[static_cast<std::size_t>(i)]) continue;
            seen[static_cast<std::size_t>(i)] = 1;
            stack.push_back(n);
        }
    }
    return false;
}

/// Cost of the cheapest path from every cell to `goal` (cells after the start counted).
std::vector<CostUnits> cost_from_all(const WeightedGridMap& map, Cell goal) {
    std::vector<CostUnits> dist(static_cast<std::size_t>(map.cell_count()), -1);
    using Item = std::pair<CostUnits, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    dist[static_cast<std::size_t>(map.index(goal))] = 0;
    open.push({0, map.index(goal)});
    while (!open.empty()) {
        auto [d, u] = open.top();
        open.pop();
        if (d != dist[static_cast<std::size_t>(u)]) continue;
        const Cell cu = map.cell_at(u);
        const CostUnits step = map.cell_cost_units(u);
        for (Cell n : map.neighbors(cu)) {
            const int v = map.index(n);
            if (v == u) continue;
            const CostUnits nd = d + step;
            auto& dv = dist[static_cast<std::size_t>(v)];
            if (dv < 0 || nd < dv) {
                dv = nd;
                open.push({nd, v});
            }
        }
    }
    return dist;
}

std::set<std::string> static_agents(const ExecutionState& state) {
    std::set<std::string> out(state.planned.removed_agents.begin(), state.planned.removed_agents.end());
    for (const auto& [id, dev] : state.deviations)
        if (dev.immobile) out.insert(id);
    return out;
}

ReplanResult stop_everyone(const ExecutionState& state, const Deadline& deadline) {
    ReplanResult out;
    for (const auto& a : state.scenario.agents) {
        out.plan.schedule[a.id] = TimedPath{{state.positions.at(a.id)}, 0, a.priority};
        out.plan.removed_agents.push_back(a.id);
    }
    std::sort(out.plan.removed_agents.begin(), out.plan.removed_agents.end());
    out.plan.status = PlanStatus::stop_all;
    out.plan.fallback_used = true;
    out.plan.elapsed_update_s = deadline.elapsed_s();
    out.stop_all = true;
    return out;
}

}  // namespace

ExecutionState begin_execution(const Scenario& scenario, const PlanResult& planned, int now) {
    if (now < 0) throw std::invalid_argument("now must be nonnegative");
    ExecutionState state{scenario, planned, now, {}, {}};
    for (const auto& a : scenario.agents) {
        auto it = planned.schedule.find(a.id);
        if (it == planned.schedule.end()) throw std::invalid_argument("plan has no path for agent '" + a.id + "'");
        state.positions[a.id] = it->second.at(now);
    }
    validate_state(state);
    return state;
}

void validate_state(const ExecutionState& state) {
    std::set<Cell, RowMajorLess> seen;
    for (const auto& a : state.scenario.agents) {
        auto it = state.positions.find(a.id);
        if (it == state.positions.end()) throw std::invalid_argument("no position for agent '" + a.id + "'");
        if (!state.scenario.map.in_bounds(it->second) || !state.scenario.map.is_passable(it->second))
            throw std::invalid_argument("agent '" + a.id + "' is on an impassable cell");
        if (!seen.insert(it->second).second) throw std::invalid_argument("agents share a position");
    }
    if (state.positions.size() != state.scenario.agents.size())
        throw std::invalid_argument("positions name unknown agents");
    for (const auto& [id, dev] : state.deviations) {
        find_agent(state.scenario, id);
        if (dev.lag < 0) throw std::invalid_argument("lag must be nonnegative");
    }
}

ExecutionState inject_delay(const ExecutionState& state, const std::string& agent, Deviation deviation) {
    find_agent(state.scenario, agent);
    if (!deviation.immobile && deviation.lag < 1) throw std::invalid_argument("lag must be at least 1");
    ExecutionState out = state;
    if (!deviation.immobile) {
        const TimedPath& path = state.planned.schedule.at(agent);
        const Cell pos = path.at(std::max(0, state.now - deviation.lag));
        for (const auto& [id, c] : state.positions)
            if (id != agent && c == pos)
                throw std::invalid_argument("delayed agent '" + agent + "' would share a cell with '" + id + "'");
        out.positions[agent] = pos;
    }
    out.deviations[agent] = deviation;
    return out;
}

Cell midway_goal(const WeightedGridMap& map, const ExecutionState& state, const std::string& agent) {
    const Agent& me = find_agent(state.scenario, agent);
    if (auto it = state.deviations.find(agent); it != state.deviations.end() && it->second.immobile)
        throw std::invalid_argument("agent '" + agent + "' is immobile");
    const Cell pos = state.positions.at(agent);
    const auto still = static_agents(state);

    std::vector<char> occupied(static_cast<std::size_t>(map.cell_count()), 0);
    std::vector<const Agent*> movers;
    for (const auto& a : state.scenario.agents) {
        if (a.id == agent) continue;
        const Cell at = state.positions.at(a.id);
        occupied[static_cast<std::size_t>(map.index(at))] = 1;
        if (auto it = state.planned.schedule.find(a.id); it != state.planned.schedule.end()) {
            const TimedPath& p = it->second;
            for (int t = std::min(state.now, p.arrival_time()); t <= p.arrival_time(); ++t)
                occupied[static_cast<std::size_t>(map.index(p.at(t)))] = 1;
        }
        if (!still.contains(a.id)) movers.push_back(&a);
    }

    // Lexicographic Dijkstra: fewest entered cells of others' paths, then cost.
    using Key = std::pair<int, CostUnits>;
    const Key unreached{std::numeric_limits<int>::max(), 0};
    std::vector<Key> reach(static_cast<std::size_t>(map.cell_count()), unreached);
    using Item = std::pair<Key, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> open;
    reach[static_cast<std::size_t>(map.index(pos))] = {0, 0};
    open.push({{0, 0}, map.index(pos)});
    while (!open.empty()) {
        auto [k, u] = open.top();
        open.pop();
        if (k != reach[static_cast<std::size_t>(u)]) continue;
        for (Cell n : map.neighbors(map.cell_at(u))) {
            const int v = map.index(n);
            if (v == u) continue;
            const Key nk{k.first + occupied[static_cast<std::size_t>(v)], k.second + map.cell_cost_units(v)};
            if (nk < reach[static_cast<std::size_t>(v)]) {
                reach[static_cast<std::size_t>(v)] = nk;
                open.push({nk, v});
            }
        }
    }

    const bool goal_ok = map.is_passable(me.goal);
    const auto to_goal = goal_ok ? cost_from_all(map, me.goal) : std::vector<CostUnits>(static_cast<std::size_t>(map.cell_count()), -1);
    constexpr CostUnits kFar = std::numeric_limits<CostUnits>::max() / 4;

    using Rank = std::tuple<int, CostUnits, CostUnits, int, int>;
    std::vector<std::pair<Rank, Cell>> candidates;
    for (int i = 0; i < map.cell_count(); ++i) {
        const Cell c = map.cell_at(i);
        if (!map.is_passable(c) || occupied[static_cast<std::size_t>(i)]) continue;
        const Key k = reach[static_cast<std::size_t>(i)];
        if (k == unreached) continue;
        const CostUnits rest = to_goal[static_cast<std::size_t>(i)] < 0 ? kFar : to_goal[static_cast<std::size_t>(i)];
        candidates.push_back({{k.first, k.second + rest, rest, c.y, c.x}, c});
    }
    std::sort(candidates.begin(), candidates.end());
    for (const auto& [rank, c] : candidates) {
        const int blocked = map.index(c);
        const bool keeps_others = std::all_of(movers.begin(), movers.end(), [&](const Agent* o) {
            return connected(map, state.positions.at(o->id), o->goal, blocked);
        });
        if (keeps_others) return c;
    }
    throw NoMidwayError("no midway goal for agent '" + agent + "'");
}

Schedule plan_suffix(const Schedule& schedule, const WeightedGridMap& map, int now) {
    Schedule out;
    for (const auto& [id, path] : schedule) {
        const int from = std::min(now, path.arrival_time());
        TimedPath p{{path.cells.begin() + from, path.cells.end()}, 0, path.priority};
        p.base_cost = path_base_cost(map, p.cells);
        out[id] = std::move(p);
    }
    return out;
}

ReplanResult replan(const ExecutionState& state, double deadline_s) {
    validate_state(state);
    const Deadline deadline(deadline_s);
    const Scenario& sc = state.scenario;
    const Schedule suffix = plan_suffix(state.planned.schedule, sc.map, state.now);

    if (state.deviations.empty()) {
        ReplanResult out;
        out.plan.schedule = suffix;
        out.plan.total_cost = sic(suffix);
        out.plan.status = state.planned.status;
        out.plan.removed_agents = state.planned.removed_agents;
        return out;
    }

    const auto still = static_agents(state);
    std::vector<Cell> static_cells;
    for (const auto& id : still) static_cells.push_back(state.positions.at(id));
    const WeightedGridMap map = sc.map.with_obstacles(static_cells);

    std::vector<Agent> mobile;
    for (const auto& a : sc.agents)
        if (!still.contains(a.id)) mobile.push_back({a.id, state.positions.at(a.id), a.goal, a.priority});
    for (const auto& a : mobile)
        if (!connected(map, a.start, a.goal)) return stop_everyone(state, deadline);

    auto attempt = [&](std::vector<Agent> agents, double budget, bool fallback) -> std::optional<PlanResult> {
        if (budget <= 0.0) return std::nullopt;
        Scenario sub{map, std::move(agents), budget, sc.conflict_threshold, sc.strategy, sc.seed, sc.horizon, fallback};
        try {
            return solve(sub);
        } catch (const UnsolvableError&) {
            return std::nullopt;
        }
    };

    auto assemble = [&](PlanResult r) {
        ReplanResult out;
        std::set<std::string> removed(r.removed_agents.begin(), r.removed_agents.end());
        for (const auto& id : state.planned.removed_agents) removed.insert(id);
        for (const auto& id : still) {
            const Agent& a = find_agent(sc, id);
            r.schedule[id] = TimedPath{{state.positions.at(id)}, 0, a.priority};
        }
        r.removed_agents.assign(removed.begin(), removed.end());
        r.total_cost = sic(r.schedule);
        r.elapsed_update_s = std::max(0.0, deadline.elapsed_s() - r.elapsed_initial_s);
        for (const auto& [id, path] : r.schedule) {
            auto it = suffix.find(id);
            if (it == suffix.end() || it->second.cells != path.cells) out.changed_agents.push_back(id);
        }
        out.stop_all = r.status == PlanStatus::stop_all;
        out.plan = std::move(r);
        return out;
    };

    if (auto first = attempt(mobile, 0.4 * deadline_s, false); first && first->status == PlanStatus::optimal)
        return assemble(std::move(*first));

    std::vector<std::string> delayed;
    for (const auto& [id, dev] : state.deviations)
        if (!dev.immobile && dev.lag > 0 && !still.contains(id)) delayed.push_back(id);

    for (const auto& d : delayed) {
        std::vector<Agent> without;
        for (const auto& a : mobile)
            if (a.id != d) without.push_back(a);
        const double budget = std::min(0.5 * deadline_s, 0.5 * deadline.remaining_s());
        auto trial = attempt(without, budget, false);
        if (!trial || trial->status != PlanStatus::optimal) continue;

        Cell goal;
        try {
            goal = midway_goal(map, state, d);
        } catch (const NoMidwayError&) {
            return stop_everyone(state, deadline);
        }
        std::vector<Agent> agents = mobile;
        for (auto& a : agents)
            if (a.id == d) a.goal = goal;
        auto result = attempt(agents, deadline.remaining_s(), true);
        if (!result) return stop_everyone(state, deadline);
        ReplanResult out = assemble(std::move(*result));
        out.midway_goals[d] = goal;
        out.troublemakers.push_back(d);
        return out;
    }

    auto result = attempt(mobile, deadline.remaining_s(), true);
    if (!result) return stop_everyone(state, deadline);
    return assemble(std::move(*result));
}

}  // namespace sitepath
