#include "properties.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "sitepath/analysis.hpp"
#include "sitepath/corpus.hpp"
#include "sitepath/replan.hpp"
#include "sitepath/scenario_io.hpp"
#include "sitepath/svg.hpp"

namespace sitepath::props {

namespace {

std::string str(Cell c) { return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")"; }

int pick(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

/// Small scenario whose agents can each reach their goal on the empty map.
Scenario small_scenario(std::mt19937_64& rng, int w, int h, std::size_t agents, double obstacles, bool uniform = true) {
    // Leave room for endpoints after obstacles.
    agents = std::clamp<std::size_t>(agents, 1, static_cast<std::size_t>(w * h) / 3);
    for (;;) {
        WeightedGridMap map = oracle::random_map(rng, w, h, obstacles, 3, !uniform && pick(rng, 0, 1));
        auto cells = oracle::random_free_cells(rng, map, 2 * agents);
        if (cells.size() < 2 * agents) continue;
        Scenario sc{map, {}};
        bool ok = true;
        for (std::size_t i = 0; i < agents && ok; ++i) {
            Agent a{"a" + std::to_string(i), cells[i], cells[agents + i], 1.0};
            if (!uniform) a.priority = std::uniform_real_distribution<double>(0.5, 3.0)(rng);
            ok = oracle::dijkstra_cost(map, a.start, a.goal) >= 0;
            sc.agents.push_back(a);
        }
        if (ok) return sc;
    }
}

void check_path(const WeightedGridMap& map, const Agent& a, const TimedPath& p, Failures& out, const std::string& tag) {
    if (p.cells.empty()) {
        out.push_back(tag + ": empty path for " + a.id);
        return;
    }
    if (p.cells.front() != a.start) out.push_back(tag + ": " + a.id + " does not start at its start");
    for (std::size_t i = 1; i < p.cells.size(); ++i)
        if (manhattan(p.cells[i - 1], p.cells[i]) > 1) out.push_back(tag + ": " + a.id + " jumps at t=" + std::to_string(i));
    for (Cell c : p.cells)
        if (!map.in_bounds(c) || !map.is_passable(c)) out.push_back(tag + ": " + a.id + " enters blocked " + str(c));
    try {
        if (path_base_cost(map, p.cells) != p.base_cost) out.push_back(tag + ": stored cost differs for " + a.id);
    } catch (const std::exception& e) {
        out.push_back(tag + ": " + e.what());
    }
}

}  // namespace

Failures map_cost_lower_bound(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        const auto map = oracle::random_map(rng, pick(rng, 1, 12), pick(rng, 1, 12), 0.2, pick(rng, 1, 3), true);
        double bound = 0.0, lowest = INFINITY;
        for (const auto& l : map.layers()) {
            double m = INFINITY;
            for (double w : l.weights)
                if (!std::isnan(w)) m = std::min(m, l.layer_weight * w);
            lowest = std::min(lowest, m);
        }
        bound = static_cast<double>(map.layers().size()) * lowest;
        for (int c = 0; c < map.cell_count(); ++c) {
            const auto cost = map.cell_cost(map.cell_at(c));
            if (cost && *cost + 1e-9 < bound) out.push_back("cell cost below bound at " + str(map.cell_at(c)));
        }
    }
    return out;
}

Failures danger_monotonic(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        const int w = pick(rng, 3, 12), h = pick(rng, 3, 12);
        const Cell o{pick(rng, 0, w - 1), pick(rng, 0, h - 1)};
        WeightedGridMap map(w, h, {Layer{"roughness", 1.0, std::vector<double>(static_cast<std::size_t>(w * h), 1.0)}}, {},
                            {DangerObject{o, std::uniform_real_distribution<double>(0.5, 20.0)(rng)}});
        // Walk away from the object one step at a time.
        Cell c = o;
        double last = map.danger_penalty(c);
        for (int step = 0; step < w + h; ++step) {
            std::vector<Cell> away;
            for (Cell n : map.neighbors(c))
                if (manhattan(n, o) > manhattan(c, o)) away.push_back(n);
            if (away.empty()) break;
            c = away[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(away.size()) - 1))];
            const double p = map.danger_penalty(c);
            if (p > last + 1e-12) out.push_back("danger penalty increased at " + str(c));
            last = p;
        }
    }
    return out;
}

Failures map_round_trip(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        std::vector<DangerObject> danger;
        auto base = oracle::random_map(rng, pick(rng, 1, 10), pick(rng, 1, 10), 0.15, pick(rng, 1, 3), true);
        auto layers = base.layers();
        // Sprinkle unknown cells and a non-unit layer weight.
        for (auto& l : layers)
            for (auto& v : l.weights)
                if (pick(rng, 0, 19) == 0) v = std::nan("");
        layers[0].layer_weight = 0.5 * pick(rng, 1, 4);
        WeightedGridMap map(base.width(), base.height(), layers, base.obstacles(), base.danger_objects(),
                            5.0 * pick(rng, 1, 3));
        try {
            const auto text = serialize_map(map);
            const auto again = parse_map(text);
            if (!(again == map)) out.push_back("map differs after round trip");
            if (serialize_map(again) != text) out.push_back("serialization not stable");
        } catch (const std::exception& e) {
            out.push_back(std::string("round trip threw: ") + e.what());
        }
    }
    return out;
}

Failures neighbours_passable(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        const auto map = oracle::random_map(rng, pick(rng, 1, 12), pick(rng, 1, 12), 0.3);
        for (int k = 0; k < map.cell_count(); ++k) {
            const Cell c = map.cell_at(k);
            if (!map.is_passable(c)) continue;
            const auto moves = map.neighbors(c);
            if (std::find(moves.begin(), moves.end(), c) == moves.end()) out.push_back("no wait at " + str(c));
            for (Cell n : moves)
                if (!map.in_bounds(n) || !map.is_passable(n) || manhattan(n, c) > 1)
                    out.push_back("bad neighbour " + str(n) + " of " + str(c));
        }
    }
    return out;
}

Failures heuristic_admissible(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        const auto map = oracle::random_map(rng, pick(rng, 2, 10), pick(rng, 2, 10), 0.2, 3, true);
        const auto free = oracle::random_free_cells(rng, map, 1);
        if (free.empty()) continue;
        const Cell goal = free[0];
        for (int k = 0; k < map.cell_count(); ++k) {
            const Cell c = map.cell_at(k);
            const CostUnits truth = oracle::dijkstra_cost(map, c, goal);
            if (truth >= 0 && heuristic(map, c, goal) > truth) out.push_back("heuristic overestimates at " + str(c));
        }
    }
    return out;
}

Failures balanced_consistent(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        const auto map = oracle::random_map(rng, pick(rng, 2, 10), pick(rng, 2, 10), 0.2, 3, true);
        const auto ends = oracle::random_free_cells(rng, map, 2);
        if (ends.size() < 2) continue;
        for (int k = 0; k < map.cell_count(); ++k) {
            const Cell u = map.cell_at(k);
            if (!map.is_passable(u)) continue;
            const auto hu = balanced_heuristics(map, u, ends[0], ends[1]);
            if (std::abs(hu.forward + hu.reverse) > 1e-9) out.push_back("h_f + h_r not zero at " + str(u));
            for (Cell v : map.neighbors(u)) {
                if (v == u) continue;
                const auto hv = balanced_heuristics(map, v, ends[0], ends[1]);
                // Moving u -> v costs the entered cell in both search directions.
                const double step = from_units(map.cell_cost_units(map.index(v)));
                if (hu.forward - hv.forward > step + 1e-9) out.push_back("forward potential inconsistent " + str(u) + str(v) + " " + std::to_string(hu.forward - hv.forward) + " > " + std::to_string(step));
                if (hv.reverse - hu.reverse > step + 1e-9) out.push_back("reverse potential inconsistent " + str(u) + str(v));
            }
        }
    }
    return out;
}

Failures bidirectional_matches_dijkstra(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        const auto map = oracle::random_map(rng, pick(rng, 1, 12), pick(rng, 1, 12), 0.25, pick(rng, 1, 3), pick(rng, 0, 1));
        const auto ends = oracle::random_free_cells(rng, map, 2);
        if (ends.empty()) continue;
        const Cell s = ends[0], g = ends.size() > 1 ? ends[1] : ends[0];
        const CostUnits truth = oracle::dijkstra_cost(map, s, g);
        try {
            const TimedPath p = bidirectional_astar(map, s, g);
            if (truth < 0) out.push_back("found a path where none exists");
            else if (p.base_cost != truth)
                out.push_back("instance " + std::to_string(i) + ": cost " + std::to_string(p.base_cost) + " vs " + std::to_string(truth));
            if (p.cells.front() != s || p.cells.back() != g) out.push_back("wrong endpoints");
            if (path_base_cost(map, p.cells) != p.base_cost) out.push_back("stored cost differs from recomputed");
        } catch (const UnreachableError&) {
            if (truth >= 0) out.push_back("reported unreachable but cost is " + std::to_string(truth));
        }
    }
    return out;
}

Failures unconstrained_matches_bidirectional(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        const auto map = oracle::random_map(rng, pick(rng, 2, 10), pick(rng, 2, 10), 0.2);
        const auto ends = oracle::random_free_cells(rng, map, 2);
        if (ends.size() < 2 || oracle::dijkstra_cost(map, ends[0], ends[1]) < 0) continue;
        const Agent a{"a", ends[0], ends[1], 1.0};
        const TimedPath timed = constrained_astar(map, a, std::span<const Constraint>{});
        const TimedPath plain = bidirectional_astar(map, a.start, a.goal);
        if (timed.base_cost != plain.base_cost) out.push_back("unconstrained timed cost differs");
        if (path_base_cost(map, timed.cells) != timed.base_cost) out.push_back("timed path cost not recomputable");
    }
    return out;
}

Failures timed_matches_oracle(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        const auto map = oracle::random_map(rng, pick(rng, 2, 4), pick(rng, 2, 4), 0.15);
        const auto ends = oracle::random_free_cells(rng, map, 2);
        if (ends.size() < 2 || oracle::dijkstra_cost(map, ends[0], ends[1]) < 0) continue;
        const Agent a{"a", ends[0], ends[1], static_cast<double>(pick(rng, 1, 3))};
        std::vector<Constraint> cs;
        const int n = pick(rng, 1, 8);
        for (int k = 0; k < n; ++k) {
            const Cell v = map.cell_at(pick(rng, 0, map.cell_count() - 1));
            Constraint c{"a", v, pick(rng, 1, 8), std::nullopt};
            if (pick(rng, 0, 2) == 0) {
                const auto moves = map.in_bounds(v) && map.is_passable(v) ? map.neighbors(v) : MoveList{};
                if (moves.size() > 0) c.from = moves[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(moves.size()) - 1))];
            }
            cs.push_back(c);
        }
        const int horizon = std::max(default_horizon(map),
                                     std::max_element(cs.begin(), cs.end(), [](auto& x, auto& y) { return x.time < y.time; })->time +
                                         map.width() + map.height());
        const auto truth = oracle::timed_cost(map, a, cs, horizon);
        try {
            const TimedPath p = constrained_astar(map, a, cs);
            if (!truth) {
                out.push_back("found a timed path the oracle rules out");
                continue;
            }
            if (p.base_cost != *truth)
                out.push_back("instance " + std::to_string(i) + ": timed cost " + std::to_string(p.base_cost) + " vs " + std::to_string(*truth));
            check_path(map, a, p, out, "timed");
            for (const auto& c : cs) {
                if (c.from) {
                    if (c.time >= 1 && c.time < static_cast<int>(p.cells.size()) && p.at(c.time - 1) == *c.from && p.at(c.time) == c.vertex)
                        out.push_back("move constraint violated");
                } else if (p.at(c.time) == c.vertex) {
                    out.push_back("vertex constraint violated at t=" + std::to_string(c.time));
                }
            }
            if (p.cells.back() != a.goal) out.push_back("timed path misses goal");
        } catch (const UnreachableError&) {
            if (truth) out.push_back("reported unreachable but oracle cost is " + std::to_string(*truth));
        }
    }
    return out;
}

Failures priority_scaling(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        const auto map = oracle::random_map(rng, pick(rng, 2, 10), pick(rng, 2, 10), 0.2);
        const auto ends = oracle::random_free_cells(rng, map, 2);
        if (ends.size() < 2 || oracle::dijkstra_cost(map, ends[0], ends[1]) < 0) continue;
        const double k = std::uniform_real_distribution<double>(0.1, 10.0)(rng);
        const Agent one{"a", ends[0], ends[1], 1.0}, scaled{"a", ends[0], ends[1], k};
        std::vector<Constraint> cs{{"a", map.cell_at(pick(rng, 0, map.cell_count() - 1)), pick(rng, 1, 5), std::nullopt}};
        try {
            const TimedPath p1 = constrained_astar(map, one, cs);
            const TimedPath pk = constrained_astar(map, scaled, cs);
            if (p1.cells != pk.cells) out.push_back("priority changed the chosen path");
            if (std::abs(pk.cost() - k * p1.cost()) > 1e-9 * std::max(1.0, pk.cost())) out.push_back("cost did not scale by priority");
        } catch (const UnreachableError&) {
        }
    }
    return out;
}

Failures solve_conflict_free(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        Scenario sc = small_scenario(rng, pick(rng, 3, 9), pick(rng, 3, 9), static_cast<std::size_t>(pick(rng, 1, 8)), 0.15, false);
        sc.deadline_s = 1.0;
        sc.conflict_threshold = pick(rng, 4, 64);
        sc.strategy = static_cast<Strategy>(pick(rng, 0, 3));
        sc.seed = rng();
        const PlanResult r = solve(sc);
        const std::string tag = "scenario " + std::to_string(i);
        if (!find_conflicts(r.schedule).empty()) out.push_back(tag + ": schedule has conflicts");
        if (r.schedule.size() != sc.agents.size()) out.push_back(tag + ": schedule misses agents");
        std::set<std::string> removed(r.removed_agents.begin(), r.removed_agents.end());
        for (const auto& a : sc.agents) {
            const auto& p = r.schedule.at(a.id);
            check_path(sc.map, a, p, out, tag);
            if (removed.contains(a.id)) {
                if (p.cells.size() != 1) out.push_back(tag + ": removed agent " + a.id + " moves");
            } else if (p.cells.back() != a.goal) {
                out.push_back(tag + ": " + a.id + " does not reach its goal");
            }
        }
        if (std::abs(r.total_cost - sic(r.schedule)) > 1e-6) out.push_back(tag + ": total cost differs from SIC");
        // Sequential fallback may admit everyone; the result is then valid but not proven optimal.
        if (r.status == PlanStatus::optimal && !removed.empty()) out.push_back(tag + ": optimal status with removals");
        if (r.status != PlanStatus::optimal && !r.fallback_used) out.push_back(tag + ": non-optimal without fallback");
    }
    return out;
}

Failures ct_cost_monotonic(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        Scenario sc = small_scenario(rng, pick(rng, 3, 7), pick(rng, 3, 7), static_cast<std::size_t>(pick(rng, 2, 6)), 0.15, false);
        sc.deadline_s = 1.0;
        std::size_t children = 0;
        SolveObserver obs;
        obs.on_child = [&](const CTNode& parent, const CTNode& child) {
            ++children;
            if (child.cost + 1e-6 < parent.cost)
                out.push_back("child cost " + std::to_string(child.cost) + " below parent " + std::to_string(parent.cost));
            if (child.depth != parent.depth + 1) out.push_back("child depth not parent depth + 1");
        };
        solve(sc, &obs);
    }
    return out;
}

Failures solve_matches_joint_oracle(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    int done = 0;
    while (done < instances) {
        Scenario sc = small_scenario(rng, pick(rng, 2, 5), pick(rng, 2, 5), static_cast<std::size_t>(pick(rng, 1, 3)), 0.15);
        const auto truth = oracle::joint_optimum_units(sc.map, sc.agents);
        if (!truth) continue;
        ++done;
        sc.deadline_s = 30.0;
        sc.conflict_threshold = 1 << 30;
        const PlanResult r = solve(sc);
        const std::string tag = "instance " + std::to_string(done);
        if (r.status != PlanStatus::optimal) out.push_back(tag + ": status " + std::string(to_string(r.status)));
        else {
            // Uniform priorities keep both sides integral in fixed-point units.
            double units = 0.0;
            for (const auto& [id, p] : r.schedule) units += p.weighted_units();
            if (units != *truth)
                out.push_back(tag + ": SIC units " + std::to_string(units) + " vs oracle " + std::to_string(*truth));
        }
        if (!find_conflicts(r.schedule).empty()) out.push_back(tag + ": conflicts");
    }
    return out;
}

Failures solve_deterministic(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        Scenario sc = small_scenario(rng, pick(rng, 4, 8), pick(rng, 4, 8), static_cast<std::size_t>(pick(rng, 2, 8)), 0.15, false);
        sc.deadline_s = 30.0;
        sc.conflict_threshold = pick(rng, 2, 16);
        sc.strategy = static_cast<Strategy>(pick(rng, 0, 3));
        sc.seed = 42;
        const PlanResult a = solve(sc), b = solve(sc);
        bool same = a.status == b.status && a.total_cost == b.total_cost && a.removed_agents == b.removed_agents &&
                    a.conflict_log == b.conflict_log && a.expanded_nodes == b.expanded_nodes;
        for (const auto& [id, p] : a.schedule) same = same && b.schedule.at(id).cells == p.cells;
        if (!same) out.push_back("scenario " + std::to_string(i) + " solved differently twice");
    }
    return out;
}

Failures stats_consistent(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        Scenario sc = small_scenario(rng, pick(rng, 3, 7), pick(rng, 3, 7), static_cast<std::size_t>(pick(rng, 2, 6)), 0.1);
        sc.deadline_s = 1.0;
        const int reps = pick(rng, 1, 3);
        std::vector<PlanResult> runs;
        const ConflictStats st = collect_stats(sc, reps, &runs);
        if (st.runs != reps || static_cast<int>(runs.size()) != reps) out.push_back("wrong run count");
        double per_agent = 0.0;
        for (const auto& [id, c] : st.per_agent) {
            if (c.initial < 0 || c.update < 0) out.push_back("negative agent count");
            per_agent += c.total();
        }
        for (const auto& [c, n] : st.vertex_counts())
            if (n < 0) out.push_back("negative vertex count");
        if (std::abs(per_agent - 2.0 * st.total_location_count()) > 1e-9)
            out.push_back("agent totals " + std::to_string(per_agent) + " != twice location totals " +
                          std::to_string(st.total_location_count()));
        double logged = 0.0;
        for (const auto& r : runs) logged += static_cast<double>(r.conflict_log.size());
        if (std::abs(logged / reps - st.total_location_count()) > 1e-9) out.push_back("location totals differ from logs");
    }
    return out;
}

namespace {

std::vector<Conflict> random_log(std::mt19937_64& rng, int w, int h, int agents, int n) {
    std::vector<Conflict> log;
    for (int k = 0; k < n; ++k) {
        Conflict c;
        int a = pick(rng, 0, agents - 1), b = pick(rng, 0, agents - 1);
        if (a == b) b = (a + 1) % agents;
        c.agent_a = "a" + std::to_string(std::min(a, b));
        c.agent_b = "a" + std::to_string(std::max(a, b));
        c.kind = pick(rng, 0, 3) == 0 ? ConflictKind::edge : ConflictKind::vertex;
        c.location = {pick(rng, 0, w - 1), pick(rng, 0, h - 1)};
        c.location_b = c.location.x + 1 < w ? Cell{c.location.x + 1, c.location.y} : Cell{c.location.x - 1, c.location.y};
        c.time = pick(rng, 0, 20);
        c.phase = pick(rng, 0, 1) ? ConflictPhase::update : ConflictPhase::initial;
        log.push_back(c);
    }
    return log;
}

}  // namespace

Failures removal_argmax(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        const int agents = pick(rng, 2, 12);
        const auto log = random_log(rng, 8, 8, agents, pick(rng, 0, 30));
        const ConflictStats st = tally_conflicts(log);
        const auto k = static_cast<std::size_t>(pick(rng, 1, 4));
        const auto chosen = suggest_removal(st, k);
        std::set<std::string> picked(chosen.begin(), chosen.end());
        double weakest = INFINITY;
        std::string weakest_id;
        for (const auto& id : chosen) {
            const auto it = st.per_agent.find(id);
            const double t = it == st.per_agent.end() ? 0.0 : it->second.total();
            if (t <= 0.0) out.push_back("agent without conflicts suggested");
            if (t < weakest || (t == weakest && id > weakest_id)) weakest = t, weakest_id = id;
        }
        std::size_t with_conflicts = 0;
        for (const auto& [id, c] : st.per_agent) {
            if (c.total() > 0.0) ++with_conflicts;
            if (picked.contains(id)) continue;
            if (c.total() > weakest || (c.total() == weakest && c.total() > 0.0 && id < weakest_id))
                out.push_back("agent " + id + " outranks a suggested agent");
        }
        if (chosen.size() != std::min(k, with_conflicts)) out.push_back("wrong number of suggestions");
    }
    return out;
}

Failures layout_near_hotspots(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        const auto map = oracle::random_map(rng, pick(rng, 4, 12), pick(rng, 4, 12), 0.2);
        const auto log = random_log(rng, map.width(), map.height(), 6, pick(rng, 1, 40));
        const auto st = tally_conflicts(log);
        const auto s = suggest_layout(map, st, static_cast<std::size_t>(pick(rng, 1, 3)));
        for (const auto& ch : s.changes) {
            bool near = false;
            for (const auto& h : s.hotspots)
                for (Cell c : h.cells) near = near || manhattan(c, ch.cell) <= 2;
            if (!near) out.push_back("suggested cell " + str(ch.cell) + " far from every hotspot");
            if (!map.in_bounds(ch.cell)) out.push_back("suggested cell outside the map");
            if (ch.values.size() != map.layers().size()) out.push_back("suggestion has wrong layer count");
        }
        const auto after = apply_layout(map, s);
        for (const auto& ch : s.changes)
            if (!after.is_passable(ch.cell)) out.push_back("applied cell still blocked");
    }
    return out;
}

namespace {

struct Running {
    ExecutionState state;
    std::string deviant;
};

std::optional<Running> random_execution(std::mt19937_64& rng, bool allow_immobile) {
    Scenario sc = small_scenario(rng, pick(rng, 4, 9), pick(rng, 4, 9), static_cast<std::size_t>(pick(rng, 2, 7)), 0.12);
    sc.deadline_s = 1.0;
    const PlanResult planned = solve(sc);
    const int now = pick(rng, 0, std::max(1, makespan(planned.schedule)));
    ExecutionState st = begin_execution(sc, planned, now);
    const auto& a = sc.agents[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(sc.agents.size()) - 1))];
    Deviation d;
    if (allow_immobile && pick(rng, 0, 2) == 0) d.immobile = true;
    else d.lag = pick(rng, 1, 4);
    try {
        st = inject_delay(st, a.id, d);
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
    return Running{st, a.id};
}

}  // namespace

Failures replan_valid(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        auto run = random_execution(rng, true);
        if (!run) continue;
        const auto& st = run->state;
        const Deadline clock;
        const ReplanResult r = replan(st, 1.0);
        const double took = clock.elapsed_s();
        const std::string tag = "execution " + std::to_string(i);
        if (took > 1.5) out.push_back(tag + ": replan took " + std::to_string(took) + " s");
        if (!find_conflicts(r.plan.schedule).empty()) out.push_back(tag + ": replanned schedule has conflicts");
        for (const auto& [id, pos] : st.positions) {
            const auto it = r.plan.schedule.find(id);
            if (it == r.plan.schedule.end()) {
                out.push_back(tag + ": " + id + " missing");
                continue;
            }
            if (it->second.cells.front() != pos) out.push_back(tag + ": " + id + " does not start where it stands");
            const auto dev = st.deviations.find(id);
            if (dev != st.deviations.end() && dev->second.immobile &&
                std::any_of(it->second.cells.begin(), it->second.cells.end(), [&](Cell c) { return c != pos; }))
                out.push_back(tag + ": immobile agent " + id + " moves");
        }
        if (r.stop_all)
            for (const auto& [id, p] : r.plan.schedule)
                if (p.cells.size() != 1) out.push_back(tag + ": stop_all schedule moves " + id);
    }
    return out;
}

Failures midway_conditions(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        auto run = random_execution(rng, false);
        if (!run) continue;
        const auto& st = run->state;
        const WeightedGridMap& map = st.scenario.map;
        Cell got;
        try {
            got = midway_goal(map, st, run->deviant);
        } catch (const NoMidwayError&) {
            continue;
        }
        const std::string tag = "execution " + std::to_string(i);
        if (!map.is_passable(got)) out.push_back(tag + ": midway goal blocked");
        std::set<std::string> still(st.planned.removed_agents.begin(), st.planned.removed_agents.end());
        const auto blocked = map.with_obstacles(std::vector<Cell>{got});
        for (const auto& a : st.scenario.agents) {
            if (a.id == run->deviant) continue;
            if (st.positions.at(a.id) == got) out.push_back(tag + ": midway goal occupied by " + a.id);
            const TimedPath& p = st.planned.schedule.at(a.id);
            for (int t = std::min(st.now, p.arrival_time()); t <= p.arrival_time(); ++t)
                if (p.at(t) == got) out.push_back(tag + ": midway goal on the remaining path of " + a.id);
            if (!still.contains(a.id) && oracle::dijkstra_cost(blocked, st.positions.at(a.id), a.goal) < 0)
                out.push_back(tag + ": midway goal cuts " + a.id + " off");
        }
        if (oracle::dijkstra_cost(map, st.positions.at(run->deviant), got) < 0) out.push_back(tag + ": midway goal unreachable");
    }
    return out;
}

Failures scenario_round_trip(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        Scenario sc = small_scenario(rng, pick(rng, 2, 10), pick(rng, 2, 10), static_cast<std::size_t>(pick(rng, 1, 5)), 0.1, false);
        sc.deadline_s = 0.5 * pick(rng, 1, 12);
        sc.conflict_threshold = pick(rng, 1, 100);
        sc.strategy = static_cast<Strategy>(pick(rng, 0, 3));
        sc.seed = rng();
        try {
            namespace fs = std::filesystem;
            const auto dir = fs::temp_directory_path() / ("sitepath_rt_" + std::to_string(seed) + "_" + std::to_string(i));
            fs::create_directories(dir);
            {
                std::ofstream(dir / "site.map") << serialize_map(sc.map);
                std::ofstream(dir / "s.yaml") << scenario_to_yaml(sc, "site.map");
            }
            const Scenario back = load_scenario((dir / "s.yaml").string());
            fs::remove_all(dir);
            bool same = back.map == sc.map && back.deadline_s == sc.deadline_s &&
                        back.conflict_threshold == sc.conflict_threshold && back.strategy == sc.strategy &&
                        back.seed == sc.seed && back.agents.size() == sc.agents.size();
            for (std::size_t k = 0; same && k < sc.agents.size(); ++k) {
                const auto &x = sc.agents[k], &y = back.agents[k];
                same = x.id == y.id && x.start == y.start && x.goal == y.goal && x.priority == y.priority;
            }
            if (!same) out.push_back("scenario " + std::to_string(i) + " changed after round trip");
        } catch (const std::exception& e) {
            out.push_back(std::string("scenario round trip threw: ") + e.what());
        }
    }
    return out;
}

Failures schedule_csv_round_trip(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    for (int i = 0; i < instances; ++i) {
        Scenario sc = small_scenario(rng, pick(rng, 3, 9), pick(rng, 3, 9), static_cast<std::size_t>(pick(rng, 1, 7)), 0.15);
        sc.deadline_s = 1.0;
        const PlanResult r = solve(sc);
        const auto ids = agent_ids(sc);
        try {
            const std::string csv = schedule_to_csv(r.schedule, ids);
            const Schedule back = schedule_from_rows(parse_schedule_csv(csv), sc);
            for (const auto& [id, p] : r.schedule)
                if (back.at(id).cells != p.cells || back.at(id).base_cost != p.base_cost)
                    out.push_back("path of " + id + " changed in CSV round trip");
            if (!find_conflicts(back).empty()) out.push_back("re-parsed schedule has conflicts");
            if (schedule_to_csv(back, ids) != csv) out.push_back("CSV not stable");
        } catch (const std::exception& e) {
            out.push_back(std::string("CSV round trip threw: ") + e.what());
        }
    }
    return out;
}

bool well_formed_xml(const std::string& text, std::string* error) {
    std::vector<std::string> open;
    auto fail = [&](const std::string& why) {
        if (error) *error = why;
        return false;
    };
    std::size_t i = 0;
    bool root_seen = false;
    while ((i = text.find('<', i)) != std::string::npos) {
        const std::size_t end = text.find('>', i);
        if (end == std::string::npos) return fail("unterminated tag");
        std::string tag = text.substr(i + 1, end - i - 1);
        i = end + 1;
        if (tag.starts_with("?") || tag.starts_with("!")) continue;
        if (tag.starts_with("/")) {
            const std::string name = tag.substr(1);
            if (open.empty() || open.back() != name) return fail("mismatched </" + name + ">");
            open.pop_back();
            continue;
        }
        const bool self_closing = tag.ends_with("/");
        if (self_closing) tag.pop_back();
        const std::string name = tag.substr(0, tag.find_first_of(" \t\n"));
        if (name.empty()) return fail("empty tag name");
        if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return fail("unbalanced quotes in <" + name + ">");
        if (open.empty() && root_seen) return fail("more than one root element");
        root_seen = true;
        if (!self_closing) open.push_back(name);
    }
    if (!open.empty()) return fail("unclosed <" + open.back() + ">");
    if (!root_seen) return fail("no element");
    return true;
}

Failures svg_valid(std::uint64_t seed, int instances) {
    Failures out;
    std::mt19937_64 rng(seed);
    const std::regex number_attr(R"re(\b(x|y|x1|y1|x2|y2|cx|cy)="(-?[0-9.]+)")re");
    const std::regex points_attr(R"re(points="([^"]*)")re");
    for (int i = 0; i < instances; ++i) {
        Scenario sc = small_scenario(rng, pick(rng, 3, 9), pick(rng, 3, 9), static_cast<std::size_t>(pick(rng, 2, 6)), 0.15);
        sc.deadline_s = 1.0;
        std::vector<PlanResult> runs;
        const auto st = collect_stats(sc, 2, &runs);
        const std::string title = "run <" + std::to_string(i) + "> & \"quotes\"";
        const std::string docs[] = {vertex_heatmap_svg(sc.map, st.vertex_counts(), title),
                                    edge_heatmap_svg(sc.map, st.edge_counts(), title),
                                    paths_svg(sc.map, runs.front().schedule, title)};
        const double w = sc.map.width() * 24.0, h = sc.map.height() * 24.0 + 20.0;
        for (const auto& doc : docs) {
            std::string why;
            if (!well_formed_xml(doc, &why)) out.push_back("svg not well formed: " + why);
            for (auto it = std::sregex_iterator(doc.begin(), doc.end(), number_attr); it != std::sregex_iterator(); ++it) {
                const double v = std::stod((*it)[2]);
                const bool is_x = (*it)[1].str().find('x') != std::string::npos;
                if (v < 0 || v > (is_x ? w : h)) out.push_back("svg coordinate outside the map: " + (*it)[0].str());
            }
            for (auto it = std::sregex_iterator(doc.begin(), doc.end(), points_attr); it != std::sregex_iterator(); ++it) {
                std::istringstream pts((*it)[1]);
                std::string pair;
                while (pts >> pair) {
                    const auto comma = pair.find(',');
                    const double x = std::stod(pair.substr(0, comma)), y = std::stod(pair.substr(comma + 1));
                    if (x < 0 || x > w || y < 0 || y > h) out.push_back("path point outside the map");
                }
            }
        }
    }
    return out;
}

}  // namespace sitepath::props
