#include "sitepath/cbs.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>
#include <stdexcept>
#include <tuple>
#include <variant>
#include <array>
#include <map>
#include <unordered_map>
#include <unordered_set>

namespace sitepath {

std::string_view to_string(Strategy s) {
    switch (s) {
        case Strategy::remove: return "remove";
        case Strategy::same_dir: return "same-dir";
        case Strategy::subregion: return "subregion";
        case Strategy::low_cost: return "low-cost";
    }
    return "remove";
}

Strategy parse_strategy(std::string_view name) {
    if (name == "remove") return Strategy::remove;
    if (name == "same-dir") return Strategy::same_dir;
    if (name == "subregion") return Strategy::subregion;
    if (name == "low-cost") return Strategy::low_cost;
    throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(PlanStatus s) {
    switch (s) {
        case PlanStatus::optimal: return "optimal";
        case PlanStatus::feasible_after_removal: return "feasible_after_removal";
        case PlanStatus::stop_all: return "stop_all";
    }
    return "optimal";
}

void validate_scenario(const Scenario& sc) {
    std::set<std::string> ids;
    std::set<Cell, RowMajorLess> starts, goals;
    for (const auto& a : sc.agents) {
        if (a.id.empty()) throw std::invalid_argument("agent id must not be empty");
        if (!ids.insert(a.id).second) throw std::invalid_argument("duplicate agent id '" + a.id + "'");
        if (!sc.map.in_bounds(a.start) || !sc.map.in_bounds(a.goal))
            throw std::invalid_argument("agent '" + a.id + "' start or goal outside the map");
        if (!sc.map.is_passable(a.start) || !sc.map.is_passable(a.goal))
            throw std::invalid_argument("agent '" + a.id + "' start or goal is not passable");
        if (!(a.priority > 0.0)) throw std::invalid_argument("agent '" + a.id + "' priority must be positive");
        if (!starts.insert(a.start).second) throw std::invalid_argument("agents share a start cell");
        if (!goals.insert(a.goal).second) throw std::invalid_argument("agents share a goal cell");
    }
    if (!(sc.deadline_s > 0.0)) throw std::invalid_argument("deadline must be positive");
    if (sc.conflict_threshold < 0) throw std::invalid_argument("conflict threshold must be nonnegative");
}

std::vector<Constraint> CTNode::constraints() const {
    std::vector<Constraint> out;
    for (const CTNode* n = this; n; n = n->parent.get())
        if (n->added) out.push_back(*n->added);
    std::reverse(out.begin(), out.end());
    return out;
}

std::vector<Constraint> CTNode::constraints_for(std::string_view agent) const {
    std::vector<Constraint> out;
    for (const CTNode* n = this; n; n = n->parent.get())
        if (n->added && n->added->agent == agent) out.push_back(*n->added);
    return out;
}

int dominant_direction(const Agent& a) {
    const int dx = a.goal.x - a.start.x;
    const int dy = a.goal.y - a.start.y;
    if (dx == 0 && dy == 0) return 4;
    if (std::abs(dx) >= std::abs(dy)) return dx > 0 ? 0 : 1;
    return dy > 0 ? 2 : 3;
}

Schedule stop_all_schedule(const std::vector<Agent>& agents) {
    Schedule s;
    for (const auto& a : agents) s[a.id] = TimedPath{{a.start}, 0, a.priority};
    return s;
}

AdmissionPlan apply_fallback(const std::vector<Agent>& agents, const CTNode& node, const ConflictStats& stats,
                             Strategy strategy, std::mt19937_64& rng, std::span<const std::string> excluded,
                             std::size_t remove_count) {
    const std::set<std::string> out_of_play(excluded.begin(), excluded.end());
    std::vector<std::size_t> remaining;
    for (std::size_t i = 0; i < agents.size(); ++i)
        if (!out_of_play.contains(agents[i].id)) remaining.push_back(i);
    auto total_of = [&](std::size_t i) {
        auto it = stats.per_agent.find(agents[i].id);
        return it == stats.per_agent.end() ? 0.0 : it->second.total();
    };
    auto by_id = [&](std::size_t a, std::size_t b) { return agents[a].id < agents[b].id; };

    AdmissionPlan plan;
    switch (strategy) {
        case Strategy::remove: {
            std::sort(remaining.begin(), remaining.end(), [&](std::size_t a, std::size_t b) {
                const double ta = total_of(a), tb = total_of(b);
                return ta != tb ? ta > tb : agents[a].id < agents[b].id;
            });
            std::size_t taken = 0;
            std::vector<std::size_t> kept;
            for (std::size_t i : remaining) {
                if (taken < remove_count && total_of(i) > 0.0) {
                    plan.deferred.push_back(agents[i].id);
                    ++taken;
                } else {
                    kept.push_back(i);
                }
            }
            std::stable_sort(kept.begin(), kept.end(), [&](std::size_t a, std::size_t b) {
                const double ta = total_of(a), tb = total_of(b);
                return ta != tb ? ta < tb : agents[a].id < agents[b].id;
            });
            for (std::size_t i : kept) plan.order.push_back(agents[i].id);
            break;
        }
        case Strategy::same_dir: {
            std::vector<std::vector<std::size_t>> groups(5);
            for (std::size_t i : remaining) groups[static_cast<std::size_t>(dominant_direction(agents[i]))].push_back(i);
            std::vector<std::size_t> group_order(5);
            std::iota(group_order.begin(), group_order.end(), 0);
            std::stable_sort(group_order.begin(), group_order.end(),
                             [&](std::size_t a, std::size_t b) { return groups[a].size() > groups[b].size(); });
            for (std::size_t g : group_order) {
                std::sort(groups[g].begin(), groups[g].end(), by_id);
                for (std::size_t i : groups[g]) plan.order.push_back(agents[i].id);
            }
            break;
        }
        case Strategy::subregion: {
            struct Box { int x0, y0, x1, y1; };
            std::vector<Box> boxes(agents.size());
            for (std::size_t i : remaining) {
                Box b{agents[i].start.x, agents[i].start.y, agents[i].start.x, agents[i].start.y};
                if (i < node.paths.size() && node.paths[i])
                    for (Cell c : node.paths[i]->cells) {
                        b.x0 = std::min(b.x0, c.x); b.y0 = std::min(b.y0, c.y);
                        b.x1 = std::max(b.x1, c.x); b.y1 = std::max(b.y1, c.y);
                    }
                boxes[i] = b;
            }
            std::vector<std::size_t> root(agents.size());
            std::iota(root.begin(), root.end(), 0);
            auto find = [&](std::size_t x) {
                while (root[x] != x) x = root[x] = root[root[x]];
                return x;
            };
            for (std::size_t a = 0; a < remaining.size(); ++a)
                for (std::size_t b = a + 1; b < remaining.size(); ++b) {
                    const Box& p = boxes[remaining[a]];
                    const Box& q = boxes[remaining[b]];
                    if (p.x0 <= q.x1 && q.x0 <= p.x1 && p.y0 <= q.y1 && q.y0 <= p.y1)
                        root[find(remaining[a])] = find(remaining[b]);
                }
            std::map<std::size_t, std::vector<std::size_t>> members;
            for (std::size_t i : remaining) members[find(i)].push_back(i);
            std::vector<std::vector<std::size_t>> components;
            for (auto& [r, m] : members) {
                std::sort(m.begin(), m.end(), by_id);
                components.push_back(std::move(m));
            }
            std::sort(components.begin(), components.end(),
                      [&](const auto& a, const auto& b) { return agents[a.front()].id < agents[b.front()].id; });
            std::vector<std::size_t> rest;
            for (auto& comp : components) {
                std::uniform_int_distribution<std::size_t> pick(0, comp.size() - 1);
                const std::size_t chosen = pick(rng);
                plan.order.push_back(agents[comp[chosen]].id);
                for (std::size_t k = 0; k < comp.size(); ++k)
                    if (k != chosen) rest.push_back(comp[k]);
            }
            std::shuffle(rest.begin(), rest.end(), rng);
            for (std::size_t i : rest) plan.order.push_back(agents[i].id);
            break;
        }
        case Strategy::low_cost: {
            auto cost_of = [&](std::size_t i) {
                return i < node.paths.size() && node.paths[i] ? node.paths[i]->weighted_units() : 0.0;
            };
            std::sort(remaining.begin(), remaining.end(), [&](std::size_t a, std::size_t b) {
                const double ca = cost_of(a), cb = cost_of(b);
                return ca != cb ? ca < cb : agents[a].id < agents[b].id;
            });
            for (std::size_t i : remaining) plan.order.push_back(agents[i].id);
            break;
        }
    }
    return plan;
}

std::optional<SequentialPlan> plan_in_order(const WeightedGridMap& map, const std::vector<Agent>& agents,
                                            std::span<const std::string> order,
                                            std::span<const std::string> deferred, int horizon,
                                            const Deadline& deadline) {
    std::unordered_map<std::string, const Agent*> by_id;
    for (const auto& a : agents) by_id[a.id] = &a;
    std::vector<std::string> waiting(deferred.begin(), deferred.end());

    while (true) {
        ConstraintTable table(map.cell_count());
        for (const auto& id : waiting) table.block_from(map.index(by_id.at(id)->start), 0);
        SequentialPlan plan;
        bool restart = false;
        for (const auto& id : order) {
            if (std::find(waiting.begin(), waiting.end(), id) != waiting.end()) continue;
            if (deadline.expired()) return std::nullopt;
            const Agent& agent = *by_id.at(id);
            std::optional<TimedPath> path;
            try {
                path = try_constrained_astar(map, agent, table, horizon, &deadline);
            } catch (const DeadlineExceeded&) {
                return std::nullopt;
            }
            if (!path) {
                waiting.push_back(id);
                restart = true;
                break;
            }
            const auto& cells = path->cells;
            for (std::size_t t = 0; t < cells.size(); ++t) {
                table.block_vertex(map.index(cells[t]), static_cast<int>(t));
                if (t + 1 < cells.size() && cells[t] != cells[t + 1])
                    table.block_move(map.index(cells[t + 1]), map.index(cells[t]), static_cast<int>(t + 1));
            }
            table.block_from(map.index(cells.back()), static_cast<int>(cells.size()) - 1);
            plan.schedule[id] = std::move(*path);
        }
        if (restart) continue;
        for (const auto& id : waiting) {
            const Agent& a = *by_id.at(id);
            plan.schedule[id] = TimedPath{{a.start}, 0, a.priority};
        }
        plan.deferred = waiting;
        return plan;
    }
}

namespace {

struct QueueEntry {
    std::shared_ptr<const CTNode> node;
    std::uint64_t seq;
};

struct QueueGreater {
    bool operator()(const QueueEntry& a, const QueueEntry& b) const {
        return std::tie(a.node->cost, a.node->conflict_count, a.seq) >
               std::tie(b.node->cost, b.node->conflict_count, b.seq);
    }
};

using ConflictKey = std::tuple<int, std::string, std::string, int, int, int, int, int>;

ConflictKey key_of(const Conflict& c) {
    return {static_cast<int>(c.kind), c.agent_a, c.agent_b, c.location.x, c.location.y, c.location_b.x,
            c.location_b.y, c.time};
}

/// Agent subset searched in one round, with the map it is searched on.
struct Round {
    WeightedGridMap map;
    std::vector<Agent> agents;
    std::vector<std::string> ids;
    std::unordered_map<std::string, std::size_t> index;
};

void evaluate(CTNode& node, const std::vector<std::string>& ids) {
    std::vector<const TimedPath*> raw;
    raw.reserve(node.paths.size());
    double cost = 0.0;
    for (const auto& p : node.paths) {
        raw.push_back(p.get());
        cost += p->weighted_units();
    }
    node.cost = cost;
    auto conflicts = find_conflicts(ids, raw);
    node.conflict_count = conflicts.size();
    node.first_conflict.reset();
    if (!conflicts.empty()) node.first_conflict = conflicts.front();
}

/// Root node from bidirectional proposals; returns the ids of unreachable agents instead when any exist.
std::variant<std::shared_ptr<CTNode>, std::vector<std::string>> make_root(const Round& round) {
    auto root = std::make_shared<CTNode>();
    std::vector<std::string> unreachable;
    for (const auto& a : round.agents) {
        if (!round.map.is_passable(a.start) || !round.map.is_passable(a.goal)) {
            unreachable.push_back(a.id);
            continue;
        }
        try {
            TimedPath p = bidirectional_astar(round.map, a.start, a.goal);
            p.priority = a.priority;
            root->paths.push_back(std::make_shared<const TimedPath>(std::move(p)));
        } catch (const UnreachableError&) {
            unreachable.push_back(a.id);
        }
    }
    if (!unreachable.empty()) return unreachable;
    evaluate(*root, round.ids);
    return root;
}

Round make_round(const Scenario& sc, const std::vector<std::string>& removed) {
    std::vector<Cell> blocked;
    Round round{sc.map, {}, {}, {}};
    for (const auto& a : sc.agents) {
        if (std::find(removed.begin(), removed.end(), a.id) != removed.end()) {
            blocked.push_back(a.start);
            continue;
        }
        round.index[a.id] = round.agents.size();
        round.agents.push_back(a);
        round.ids.push_back(a.id);
    }
    if (!blocked.empty()) round.map = sc.map.with_obstacles(blocked);
    return round;
}

enum class RoundEnd { solved, threshold, pressure };

struct RoundOutcome {
    RoundEnd end;
    std::shared_ptr<const CTNode> node;
};

RoundOutcome search_round(const Round& round, std::shared_ptr<const CTNode> root, int threshold, int horizon,
                          const Deadline& pressure, PlanResult& result, const SolveObserver* observer) {
    std::priority_queue<QueueEntry, std::vector<QueueEntry>, QueueGreater> open;
    std::uint64_t seq = 0;
    open.push({std::move(root), seq++});
    std::set<ConflictKey> distinct;

    while (!open.empty()) {
        if (pressure.expired()) return {RoundEnd::pressure, nullptr};
        auto node = open.top().node;
        open.pop();
        ++result.expanded_nodes;
        if (!node->first_conflict) return {RoundEnd::solved, node};

        Conflict conflict = *node->first_conflict;
        conflict.phase = ConflictPhase::update;
        result.conflict_log.push_back(conflict);
        distinct.insert(key_of(conflict));
        if (static_cast<int>(distinct.size()) > threshold) return {RoundEnd::threshold, nullptr};

        std::array<Constraint, 2> branches;
        if (conflict.kind == ConflictKind::vertex) {
            branches[0] = {conflict.agent_a, conflict.location, conflict.time, std::nullopt};
            branches[1] = {conflict.agent_b, conflict.location, conflict.time, std::nullopt};
        } else {
            branches[0] = {conflict.agent_a, conflict.location_b, conflict.time + 1, conflict.location};
            branches[1] = {conflict.agent_b, conflict.location, conflict.time + 1, conflict.location_b};
        }
        for (const auto& constraint : branches) {
            auto child = std::make_shared<CTNode>();
            child->parent = node;
            child->added = constraint;
            child->paths = node->paths;
            child->depth = node->depth + 1;
            const std::size_t idx = round.index.at(constraint.agent);
            const auto constraints = child->constraints_for(constraint.agent);
            ConstraintTable table(round.map, constraints);
            std::optional<TimedPath> path;
            try {
                path = try_constrained_astar(round.map, round.agents[idx], table, horizon, &pressure);
            } catch (const DeadlineExceeded&) {
                return {RoundEnd::pressure, nullptr};
            }
            if (!path) continue;
            child->paths[idx] = std::make_shared<const TimedPath>(std::move(*path));
            evaluate(*child, round.ids);
            ++result.generated_nodes;
            if (observer && observer->on_child) observer->on_child(*node, *child);
            open.push({std::move(child), seq++});
        }
    }
    // No constraint-respecting solution inside the horizon: hand over to the fallback.
    return {RoundEnd::threshold, nullptr};
}

void finish(PlanResult& result, Schedule schedule, PlanStatus status, std::vector<std::string> removed,
            const Deadline& deadline) {
    if (!find_conflicts(schedule).empty()) throw std::logic_error("solver produced a conflicting schedule");
    result.schedule = std::move(schedule);
    result.total_cost = sic(result.schedule);
    result.status = status;
    std::sort(removed.begin(), removed.end());
    result.removed_agents = std::move(removed);
    result.elapsed_update_s = std::max(0.0, deadline.elapsed_s() - result.elapsed_initial_s);
}

}  // namespace

PlanResult solve(const Scenario& sc, const SolveObserver* observer) {
    validate_scenario(sc);
    const Deadline deadline(sc.deadline_s);
    const Deadline pressure = sc.fallback_enabled ? deadline.scaled(kFallbackStartFraction) : deadline;
    const int horizon = sc.horizon > 0 ? sc.horizon : default_horizon(sc.map);
    PlanResult result;
    std::mt19937_64 rng(sc.seed);

    Round round = make_round(sc, {});
    auto made = make_root(round);
    if (auto* bad = std::get_if<std::vector<std::string>>(&made))
        throw UnsolvableError("agent '" + bad->front() + "' cannot reach its goal");
    const std::shared_ptr<const CTNode> root = std::get<std::shared_ptr<CTNode>>(made);
    {
        std::vector<const TimedPath*> raw;
        for (const auto& p : root->paths) raw.push_back(p.get());
        for (auto c : find_conflicts(round.ids, raw)) {
            c.phase = ConflictPhase::initial;
            result.conflict_log.push_back(std::move(c));
        }
    }
    result.elapsed_initial_s = deadline.elapsed_s();

    std::vector<std::string> removed;
    std::shared_ptr<const CTNode> round_root = root;
    while (true) {
        const auto outcome = search_round(round, round_root, sc.conflict_threshold, horizon, pressure, result, observer);
        if (outcome.end == RoundEnd::solved) {
            Schedule schedule;
            for (std::size_t i = 0; i < round.agents.size(); ++i) schedule[round.ids[i]] = *outcome.node->paths[i];
            for (const auto& a : sc.agents)
                if (!schedule.contains(a.id)) schedule[a.id] = TimedPath{{a.start}, 0, a.priority};
            const PlanStatus status = removed.empty()        ? PlanStatus::optimal
                                      : round.agents.empty() ? PlanStatus::stop_all
                                                             : PlanStatus::feasible_after_removal;
            finish(result, std::move(schedule), status, removed, deadline);
            return result;
        }
        if (!sc.fallback_enabled) {
            std::vector<std::string> everyone;
            for (const auto& a : sc.agents) everyone.push_back(a.id);
            finish(result, stop_all_schedule(sc.agents), PlanStatus::stop_all, std::move(everyone), deadline);
            return result;
        }
        result.fallback_used = true;
        if (outcome.end != RoundEnd::threshold || sc.strategy != Strategy::remove || pressure.expired()) break;

        const ConflictStats stats = tally_conflicts(result.conflict_log);
        // Prefer the most conflicting agent whose waiting start cuts nobody off.
        std::vector<std::string> passed_over = removed;
        std::optional<std::string> first_choice;
        std::shared_ptr<CTNode> next_root;
        while (!next_root) {
            const AdmissionPlan plan = apply_fallback(sc.agents, *root, stats, Strategy::remove, rng, passed_over, 1);
            if (plan.deferred.empty()) break;
            const std::string& candidate = plan.deferred.front();
            if (!first_choice) first_choice = candidate;
            std::vector<std::string> trial = removed;
            trial.push_back(candidate);
            Round trial_round = make_round(sc, trial);
            auto made_trial = make_root(trial_round);
            if (auto* ok = std::get_if<std::shared_ptr<CTNode>>(&made_trial)) {
                removed = std::move(trial);
                round = std::move(trial_round);
                next_root = *ok;
            } else {
                passed_over.push_back(candidate);
            }
        }
        if (!next_root) {
            if (!first_choice) break;
            removed.push_back(*first_choice);
        }
        // Waiting agents block their start cells, which may cut others off; those wait too.
        while (!next_root) {
            round = make_round(sc, removed);
            auto next = make_root(round);
            if (auto* bad = std::get_if<std::vector<std::string>>(&next))
                removed.insert(removed.end(), bad->begin(), bad->end());
            else
                next_root = std::get<std::shared_ptr<CTNode>>(next);
        }
        round_root = next_root;
    }

    // Sequential admission in the strategy's order, within the hard deadline.
    const ConflictStats stats = tally_conflicts(result.conflict_log);
    AdmissionPlan plan = apply_fallback(sc.agents, *root, stats, sc.strategy, rng, removed, 0);
    std::vector<std::string> waiting = removed;
    waiting.insert(waiting.end(), plan.deferred.begin(), plan.deferred.end());
    auto sequential = plan_in_order(sc.map, sc.agents, plan.order, waiting, horizon, deadline);
    if (sequential) {
        finish(result, std::move(sequential->schedule), PlanStatus::feasible_after_removal,
               std::move(sequential->deferred), deadline);
        return result;
    }
    std::vector<std::string> everyone;
    for (const auto& a : sc.agents) everyone.push_back(a.id);
    finish(result, stop_all_schedule(sc.agents), PlanStatus::stop_all, std::move(everyone), deadline);
    return result;
}

}  // namespace sitepath
