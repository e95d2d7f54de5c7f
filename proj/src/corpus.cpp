#include "sitepath/corpus.hpp"

#include <algorithm>
#include <array>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

#include "sitepath/scenario_io.hpp"

namespace sitepath {

namespace {

using Terrain = std::array<double, 3>;
constexpr Terrain kFlat{1, 1, 1};

/// Mutable site sketch turned into a WeightedGridMap once finished.
struct Site {
    int w, h;
    std::vector<Terrain> terrain;
    std::vector<char> blocked;

    Site(int width, int height) : w(width), h(height), terrain(static_cast<std::size_t>(width * height), kFlat),
                                  blocked(static_cast<std::size_t>(width * height), 0) {}

    std::size_t at(int x, int y) const { return static_cast<std::size_t>(y * w + x); }
    bool inside(int x, int y) const { return x >= 0 && y >= 0 && x < w && y < h; }

    void set_layer(int x0, int y0, int x1, int y1, std::size_t layer, double v) {
        for (int y = std::max(0, y0); y <= std::min(h - 1, y1); ++y)
            for (int x = std::max(0, x0); x <= std::min(w - 1, x1); ++x) terrain[at(x, y)][layer] = v;
    }
    void block(int x0, int y0, int x1, int y1, bool on = true) {
        for (int y = std::max(0, y0); y <= std::min(h - 1, y1); ++y)
            for (int x = std::max(0, x0); x <= std::min(w - 1, x1); ++x) blocked[at(x, y)] = on;
    }

    WeightedGridMap build() const {
        static const char* names[] = {"roughness", "slope", "safety"};
        std::vector<Layer> layers;
        for (std::size_t l = 0; l < 3; ++l) {
            Layer layer{names[l], 1.0, std::vector<double>(terrain.size())};
            for (std::size_t i = 0; i < terrain.size(); ++i) layer.weights[i] = terrain[i][l];
            layers.push_back(std::move(layer));
        }
        std::vector<Cell> obstacles;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (blocked[at(x, y)]) obstacles.push_back({x, y});
        return WeightedGridMap(w, h, std::move(layers), std::move(obstacles));
    }
};

int uniform(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

void scatter_patches(Site& s, std::mt19937_64& rng, int count) {
    for (int i = 0; i < count; ++i) {
        const int x = uniform(rng, 0, s.w - 1), y = uniform(rng, 0, s.h - 1);
        const int pw = uniform(rng, 1, 4), ph = uniform(rng, 1, 3);
        switch (uniform(rng, 0, 2)) {
            case 0: s.set_layer(x, y, x + pw - 1, y + ph - 1, 0, kRoughnessLevels[uniform(rng, 1, 2)]); break;
            case 1: s.set_layer(x, y, x + pw - 1, y + ph - 1, 1, kSlopeLevels[1]); break;
            default: s.set_layer(x, y, x + pw - 1, y + ph - 1, 2, kSafetyLevels[1]); break;
        }
    }
}

void scatter_blocks(Site& s, std::mt19937_64& rng, int count, int max_side) {
    for (int i = 0; i < count; ++i) {
        const int x = uniform(rng, 0, s.w - 1), y = uniform(rng, 0, s.h - 1);
        s.block(x, y, x + uniform(rng, 1, max_side) - 1, y + uniform(rng, 1, max_side) - 1);
    }
}

/// Cells of the largest 4-connected passable component, row-major.
std::vector<Cell> largest_component(const WeightedGridMap& map) {
    std::vector<int> label(static_cast<std::size_t>(map.cell_count()), -1);
    std::vector<std::vector<Cell>> comps;
    for (int i = 0; i < map.cell_count(); ++i) {
        const Cell c0 = map.cell_at(i);
        if (!map.is_passable(c0) || label[static_cast<std::size_t>(i)] >= 0) continue;
        const int id = static_cast<int>(comps.size());
        comps.emplace_back();
        std::vector<Cell> stack{c0};
        label[static_cast<std::size_t>(i)] = id;
        while (!stack.empty()) {
            const Cell c = stack.back();
            stack.pop_back();
            comps.back().push_back(c);
            for (Cell n : map.neighbors(c)) {
                auto& l = label[static_cast<std::size_t>(map.index(n))];
                if (l < 0) {
                    l = id;
                    stack.push_back(n);
                }
            }
        }
    }
    if (comps.empty()) throw std::logic_error("site has no passable cell");
    auto best = std::max_element(comps.begin(), comps.end(), [](const auto& a, const auto& b) { return a.size() < b.size(); });
    std::sort(best->begin(), best->end(), RowMajorLess{});
    return *best;
}

/// Draws `n` agents with pairwise distinct start and goal cells from the given pools.
std::vector<Agent> place_agents(std::mt19937_64& rng, std::size_t n, std::vector<Cell> start_pool,
                                std::vector<Cell> goal_pool, std::size_t first_id = 1) {
    std::shuffle(start_pool.begin(), start_pool.end(), rng);
    std::shuffle(goal_pool.begin(), goal_pool.end(), rng);
    std::set<Cell, RowMajorLess> used;
    std::vector<Agent> agents;
    std::size_t gi = 0;
    for (Cell s : start_pool) {
        if (agents.size() == n) break;
        if (used.contains(s)) continue;
        while (gi < goal_pool.size() && (used.contains(goal_pool[gi]) || goal_pool[gi] == s)) ++gi;
        if (gi == goal_pool.size()) break;
        used.insert(s);
        used.insert(goal_pool[gi]);
        agents.push_back({"agent" + std::to_string(first_id + agents.size()), s, goal_pool[gi++], 1.0});
    }
    if (agents.size() != n) throw std::logic_error("not enough free cells for the requested agents");
    return agents;
}

WeightedGridMap open_site(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    Site s(20, 13);
    scatter_patches(s, rng, 10);
    scatter_blocks(s, rng, 6, 2);
    return s.build();
}

WeightedGridMap obstacle_field(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x3u);
    Site s(17, 12);
    scatter_patches(s, rng, 8);
    scatter_blocks(s, rng, 22, 2);
    return s.build();
}

WeightedGridMap bridge_site(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x4u);
    Site s(20, 13);
    scatter_patches(s, rng, 8);
    s.block(9, 0, 10, 12);
    s.block(9, 6, 10, 6, false);
    s.terrain[s.at(9, 6)] = kFlat;
    s.terrain[s.at(10, 6)] = kFlat;
    return s.build();
}

WeightedGridMap mine_site(std::uint64_t seed) {
    std::mt19937_64 rng(seed ^ 0x5u);
    Site s(20, 13);
    // Outer bench, middle terrace and pit floor get increasing roughness.
    s.set_layer(3, 3, 16, 9, 0, kRoughnessLevels[1]);
    s.set_layer(6, 5, 13, 7, 0, kRoughnessLevels[2]);
    scatter_patches(s, rng, 4);
    auto ring = [&](int x0, int y0, int x1, int y1) {
        s.block(x0, y0, x1, y0);
        s.block(x0, y1, x1, y1);
        s.block(x0, y0, x0, y1);
        s.block(x1, y0, x1, y1);
    };
    ring(2, 2, 17, 10);
    ring(5, 4, 14, 8);
    const int ramp_outer = uniform(rng, 4, 15);
    s.block(ramp_outer, 2, ramp_outer, 2, false);
    s.set_layer(ramp_outer, 2, ramp_outer, 2, 1, kSlopeLevels[1]);
    const int ramp_inner = uniform(rng, 5, 7);
    s.block(14, ramp_inner, 14, ramp_inner, false);
    s.set_layer(14, ramp_inner, 14, ramp_inner, 1, kSlopeLevels[1]);
    return s.build();
}

std::vector<Cell> filter(const std::vector<Cell>& cells, auto pred) {
    std::vector<Cell> out;
    std::copy_if(cells.begin(), cells.end(), std::back_inserter(out), pred);
    return out;
}

Scenario with_agents(int archetype, std::uint64_t seed, std::size_t count) {
    std::mt19937_64 rng(seed * 1000003u + static_cast<std::uint64_t>(archetype));
    switch (archetype) {
        case 1:
        case 2: {
            WeightedGridMap map = open_site(seed);
            const auto pool = largest_component(map);
            return {map, place_agents(rng, count, pool, pool)};
        }
        case 3: {
            WeightedGridMap map = obstacle_field(seed);
            const auto pool = largest_component(map);
            return {map, place_agents(rng, count, pool, pool)};
        }
        case 4: {
            WeightedGridMap map = bridge_site(seed);
            const auto pool = largest_component(map);
            const auto west = filter(pool, [](Cell c) { return c.x < 9; });
            const auto east = filter(pool, [](Cell c) { return c.x > 10; });
            auto agents = place_agents(rng, count / 2, west, east);
            std::set<Cell, RowMajorLess> used;
            for (const auto& a : agents) used.insert({a.start, a.goal});
            std::vector<Cell> east_free = filter(east, [&](Cell c) { return !used.contains(c); });
            std::vector<Cell> west_free = filter(west, [&](Cell c) { return !used.contains(c); });
            auto back = place_agents(rng, count - count / 2, east_free, west_free, agents.size() + 1);
            agents.insert(agents.end(), back.begin(), back.end());
            return {map, std::move(agents)};
        }
        case 5: {
            WeightedGridMap map = mine_site(seed);
            const auto pool = largest_component(map);
            const auto outside = filter(pool, [](Cell c) { return c.x < 2 || c.x > 17 || c.y < 2 || c.y > 10; });
            const auto inside = filter(pool, [](Cell c) { return c.x > 2 && c.x < 17 && c.y > 2 && c.y < 10; });
            auto agents = place_agents(rng, count / 2, outside, inside);
            std::set<Cell, RowMajorLess> used;
            for (const auto& a : agents) used.insert({a.start, a.goal});
            auto back = place_agents(rng, count - count / 2, filter(inside, [&](Cell c) { return !used.contains(c); }),
                                     filter(outside, [&](Cell c) { return !used.contains(c); }), agents.size() + 1);
            agents.insert(agents.end(), back.begin(), back.end());
            return {map, std::move(agents)};
        }
    }
    throw std::invalid_argument("archetype must be 1..5");
}

std::size_t default_agent_count(int archetype) {
    switch (archetype) {
        case 2: return 50;
        case 4: return 12;
        case 5: return 12;
        default: return 20;
    }
}

}  // namespace

std::string archetype_name(int archetype) { return "archetype-" + std::to_string(archetype); }

Scenario make_archetype(int archetype, std::uint64_t seed) {
    Scenario sc = with_agents(archetype, seed, default_agent_count(archetype));
    sc.seed = seed;
    return sc;
}

Scenario random_archetype_scenario(std::mt19937_64& rng) {
    const int archetype = uniform(rng, 1, 5);
    const std::uint64_t seed = rng();
    const std::size_t max_agents = archetype == 3 ? 40 : archetype >= 4 ? 20 : 50;
    const auto count = static_cast<std::size_t>(uniform(rng, 1, static_cast<int>(max_agents)));
    Scenario sc = with_agents(archetype, seed, count);
    sc.seed = seed;
    return sc;
}

Scenario make_bottleneck(std::uint64_t seed) {
    std::mt19937_64 rng(seed * 7919u + 17u);
    Site s(15, 9);
    s.block(7, 0, 7, 8);
    s.block(7, 3, 7, 3, false);
    s.block(7, 5, 7, 5, false);
    // The northern gap is rough and unsafe, so everyone prefers the southern one.
    s.terrain[s.at(7, 5)] = {kRoughnessLevels[2], kSlopeLevels[1], kSafetyLevels[1]};
    WeightedGridMap map = s.build();

    std::vector<Cell> west, east, west_edge, east_edge;
    for (int y = 0; y < 9; ++y) {
        for (int x = 1; x <= 3; ++x) west.push_back({x, y});
        for (int x = 11; x <= 13; ++x) east.push_back({x, y});
        west_edge.push_back({0, y});
        east_edge.push_back({14, y});
    }
    auto stream = place_agents(rng, 7, west, east);
    auto against = place_agents(rng, 1, east_edge, west_edge, stream.size() + 1);
    stream.insert(stream.end(), against.begin(), against.end());
    Scenario sc{map, std::move(stream)};
    sc.seed = seed;
    return sc;
}

Scenario make_bridging_scenario() {
    Site s(13, 5);
    s.block(2, 0, 8, 4);
    s.block(2, 2, 8, 2, false);
    s.block(4, 3, 4, 3, false);
    Scenario sc{s.build(),
                {{"agent14", {10, 1}, {1, 1}, 1.0}, {"agent16", {4, 2}, {12, 2}, 1.0}, {"agent17", {10, 3}, {1, 3}, 1.0}}};
    return sc;
}

Scenario make_sole_corridor_scenario() {
    Site s(13, 3);
    s.block(3, 0, 9, 2);
    s.block(3, 1, 9, 1, false);
    Scenario sc{s.build(), {{"agentA", {1, 1}, {11, 1}, 1.0}, {"agentB", {12, 1}, {0, 1}, 1.0}}};
    return sc;
}

void write_corpus(const std::string& out_dir, std::uint64_t seed) {
    std::filesystem::create_directories(out_dir);
    for (int n = 1; n <= 5; ++n) {
        const Scenario sc = make_archetype(n, seed);
        const std::string name = archetype_name(n);
        std::ofstream(std::filesystem::path(out_dir) / (name + ".map"), std::ios::binary) << serialize_map(sc.map);
        std::ofstream(std::filesystem::path(out_dir) / (name + ".yaml"), std::ios::binary)
            << scenario_to_yaml(sc, name + ".map");
    }
}

}  // namespace sitepath
