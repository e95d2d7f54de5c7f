#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sitepath/cbs.hpp"

namespace sitepath {

struct NamedScenario {
    std::string name;
    Scenario scenario;
};

/// Terrain levels per layer: roughness {1,5,9}, slope {1,5}, safety {1,15}.
inline constexpr double kRoughnessLevels[] = {1, 5, 9};
inline constexpr double kSlopeLevels[] = {1, 5};
inline constexpr double kSafetyLevels[] = {1, 15};

/// Site archetypes 1..5: open 20x13 with 20 agents, the same site with 50
/// agents, a 17x12 obstacle field, a two-side site joined by a one-cell
/// bridge (12 agents), and a terraced mine with a single ramp per level.
Scenario make_archetype(int archetype, std::uint64_t seed);
std::string archetype_name(int archetype);

/// A random archetype with a random agent count (1..50), for property tests.
Scenario random_archetype_scenario(std::mt19937_64& rng);

/// Wall with two gaps; one gap has a costly cell so traffic funnels through
/// the other, and one agent crosses against the stream.
Scenario make_bottleneck(std::uint64_t seed);

/// Corridor with a single side bay between two work areas. agent16 starts in
/// the corridor below the bay, heads east, and must let two westbound agents pass.
Scenario make_bridging_scenario();
/// Width-1 corridor without any side cell, used for the immobile case.
Scenario make_sole_corridor_scenario();

/// Writes archetype-<n>.map and archetype-<n>.yaml for n = 1..5.
void write_corpus(const std::string& out_dir, std::uint64_t seed);

}  // namespace sitepath
