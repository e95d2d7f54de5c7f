#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "sitepath/low_level.hpp"

namespace sitepath {

enum class ConflictKind { vertex, edge };
enum class ConflictPhase { initial, update };

/// Vertex conflict: both agents occupy `location` at `time`.
/// Edge conflict: agent_a moves location -> location_b while agent_b moves
/// location_b -> location, departing at `time`. Following and rotations are
/// not conflicts.
struct Conflict {
    ConflictKind kind = ConflictKind::vertex;
    std::string agent_a;
    std::string agent_b;
    Cell location;
    Cell location_b;
    int time = 0;
    ConflictPhase phase = ConflictPhase::initial;

    friend bool operator==(const Conflict&, const Conflict&) = default;
};

using Schedule = std::map<std::string, TimedPath>;

/// All vertex and edge conflicts with goal-stay occupancy, ordered by time,
/// then agent ids, then kind (vertex first).
std::vector<Conflict> find_conflicts(const Schedule& schedule);

/// Same, over parallel arrays of ids and paths (ids need not be sorted).
std::vector<Conflict> find_conflicts(std::span<const std::string> ids, std::span<const TimedPath* const> paths,
                                     std::size_t limit = static_cast<std::size_t>(-1));

/// Sum of priority-weighted path costs.
double sic(const Schedule& schedule);

/// Longest arrival time in the schedule.
int makespan(const Schedule& schedule);

const char* to_string(ConflictKind kind);
const char* to_string(ConflictPhase phase);

}  // namespace sitepath
