#include "sitepath/scenario_io.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

namespace sitepath {

namespace {

Cell cell_from_yaml(const YAML::Node& n, const std::string& what) {
    if (!n || !n.IsSequence() || n.size() != 2) throw ScenarioError(what + " must be [x, y]");
    return {n[0].as<int>(), n[1].as<int>()};
}

std::string cell_text(Cell c) { return "[" + std::to_string(c.x) + "," + std::to_string(c.y) + "]"; }

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    if (quoted) throw ScenarioError("unterminated quote in CSV");
    fields.push_back(std::move(cur));
    return fields;
}

Cell parse_cell_text(std::string_view s) {
    std::string t(s);
    t.erase(std::remove(t.begin(), t.end(), ' '), t.end());
    int x = 0, y = 0;
    char a = 0, comma = 0, b = 0;
    std::istringstream in(t);
    if (!(in >> a >> x >> comma >> y >> b) || a != '[' || comma != ',' || b != ']')
        throw ScenarioError("bad cell '" + std::string(s) + "'");
    return {x, y};
}

}  // namespace

Scenario parse_scenario(std::string_view yaml, const std::string& base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(yaml));
    } catch (const YAML::Exception& e) {
        throw ScenarioError(std::string("scenario YAML: ") + e.what());
    }
    if (!root.IsMap()) throw ScenarioError("scenario must be a mapping");
    if (!root["map"]) throw ScenarioError("scenario has no map");
    try {
        std::filesystem::path map_path = root["map"].as<std::string>();
        if (map_path.is_relative()) map_path = std::filesystem::path(base_dir) / map_path;
        std::optional<WeightedGridMap> map;
        try {
            map = load_map(map_path.string());
        } catch (const std::runtime_error& e) {
            throw ScenarioError(e.what());
        }
        Scenario sc{std::move(*map), {}};
        if (root["deadline_s"]) sc.deadline_s = root["deadline_s"].as<double>();
        if (root["threshold"]) sc.conflict_threshold = root["threshold"].as<int>();
        if (root["strategy"]) sc.strategy = parse_strategy(root["strategy"].as<std::string>());
        if (root["seed"]) sc.seed = root["seed"].as<std::uint64_t>();
        if (root["horizon"]) sc.horizon = root["horizon"].as<int>();
        const YAML::Node agents = root["agents"];
        if (!agents || !agents.IsSequence()) throw ScenarioError("scenario has no agent list");
        for (const auto& a : agents) {
            if (!a["id"]) throw ScenarioError("agent without id");
            Agent agent{a["id"].as<std::string>(), cell_from_yaml(a["start"], "start"), cell_from_yaml(a["goal"], "goal"), 1.0};
            if (a["priority"]) agent.priority = a["priority"].as<double>();
            sc.agents.push_back(std::move(agent));
        }
        validate_scenario(sc);
        return sc;
    } catch (const YAML::Exception& e) {
        throw ScenarioError(std::string("scenario YAML: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ScenarioError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const auto dir = std::filesystem::path(path).parent_path().string();
    return parse_scenario(buf.str(), dir.empty() ? "." : dir);
}

std::string scenario_to_yaml(const Scenario& sc, const std::string& map_ref) {
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "map" << YAML::Value << map_ref;
    out << YAML::Key << "deadline_s" << YAML::Value << sc.deadline_s;
    out << YAML::Key << "threshold" << YAML::Value << sc.conflict_threshold;
    out << YAML::Key << "strategy" << YAML::Value << std::string(to_string(sc.strategy));
    out << YAML::Key << "seed" << YAML::Value << sc.seed;
    if (sc.horizon > 0) out << YAML::Key << "horizon" << YAML::Value << sc.horizon;
    out << YAML::Key << "agents" << YAML::Value << YAML::BeginSeq;
    for (const auto& a : sc.agents) {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << a.id;
        out << YAML::Key << "start" << YAML::Value << YAML::Flow << YAML::BeginSeq << a.start.x << a.start.y << YAML::EndSeq;
        out << YAML::Key << "goal" << YAML::Value << YAML::Flow << YAML::BeginSeq << a.goal.x << a.goal.y << YAML::EndSeq;
        out << YAML::Key << "priority" << YAML::Value << a.priority;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::vector<std::string> agent_ids(const Scenario& sc) {
    std::vector<std::string> ids;
    for (const auto& a : sc.agents) ids.push_back(a.id);
    return ids;
}

std::string schedule_to_csv(const Schedule& schedule, std::span<const std::string> order) {
    std::size_t width = 0;
    for (const auto& id : order) width = std::max(width, schedule.at(id).cells.size());
    std::string out = "agent,start";
    for (std::size_t t = 1; t < width; ++t) out += "," + std::to_string(t);
    out += "\n";
    for (const auto& id : order) {
        const auto& cells = schedule.at(id).cells;
        out += id;
        for (std::size_t t = 0; t < width; ++t) {
            out += ",";
            if (t < cells.size()) out += "\"" + cell_text(cells[t]) + "\"";
        }
        out += "\n";
    }
    return out;
}

std::vector<ScheduleRow> parse_schedule_csv(std::string_view csv) {
    std::vector<ScheduleRow> rows;
    std::istringstream in{std::string(csv)};
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto fields = split_csv_line(line);
        if (header) {
            if (fields.size() < 2 || fields[0] != "agent" || fields[1] != "start")
                throw ScenarioError("schedule CSV header must start with agent,start");
            header = false;
            continue;
        }
        ScheduleRow row{fields[0], {}};
        bool ended = false;
        for (std::size_t i = 1; i < fields.size(); ++i) {
            if (fields[i].empty()) {
                ended = true;
                continue;
            }
            if (ended) throw ScenarioError("gap in schedule row for " + row.agent);
            row.cells.push_back(parse_cell_text(fields[i]));
        }
        if (row.cells.empty()) throw ScenarioError("empty schedule row for " + row.agent);
        rows.push_back(std::move(row));
    }
    if (header) throw ScenarioError("schedule CSV is empty");
    return rows;
}

Schedule schedule_from_rows(const std::vector<ScheduleRow>& rows, const Scenario& sc) {
    Schedule schedule;
    for (const auto& row : rows) {
        auto it = std::find_if(sc.agents.begin(), sc.agents.end(), [&](const Agent& a) { return a.id == row.agent; });
        if (it == sc.agents.end()) throw ScenarioError("schedule names unknown agent " + row.agent);
        if (row.cells.front() != it->start) throw ScenarioError("schedule start differs for " + row.agent);
        TimedPath p{row.cells, 0, it->priority};
        try {
            p.base_cost = path_base_cost(sc.map, p.cells);
        } catch (const std::invalid_argument& e) {
            throw ScenarioError("schedule path for " + row.agent + ": " + e.what());
        }
        if (!schedule.emplace(row.agent, std::move(p)).second) throw ScenarioError("duplicate row for " + row.agent);
    }
    if (schedule.size() != sc.agents.size()) throw ScenarioError("schedule does not cover every agent");
    return schedule;
}

nlohmann::json to_json(Cell c) { return nlohmann::json::array({c.x, c.y}); }

Cell cell_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 2) throw ScenarioError("cell must be [x, y]");
    return {j[0].get<int>(), j[1].get<int>()};
}

nlohmann::json to_json(const Conflict& c) {
    nlohmann::json j{{"kind", to_string(c.kind)},
                     {"phase", to_string(c.phase)},
                     {"agents", {c.agent_a, c.agent_b}},
                     {"location", to_json(c.location)},
                     {"time", c.time}};
    if (c.kind == ConflictKind::edge) j["location_b"] = to_json(c.location_b);
    return j;
}

nlohmann::json to_json(const PlanResult& r, std::span<const std::string> order) {
    nlohmann::json agents = nlohmann::json::array();
    for (const auto& id : order) {
        const auto& p = r.schedule.at(id);
        nlohmann::json path = nlohmann::json::array();
        for (Cell c : p.cells) path.push_back(to_json(c));
        agents.push_back({{"id", id}, {"priority", p.priority}, {"cost", p.cost()}, {"path", std::move(path)}});
    }
    nlohmann::json conflicts = nlohmann::json::array();
    for (const auto& c : r.conflict_log) conflicts.push_back(to_json(c));
    return {{"status", to_string(r.status)},
            {"total_cost", r.total_cost},
            {"removed_agents", r.removed_agents},
            {"elapsed_initial_s", r.elapsed_initial_s},
            {"elapsed_update_s", r.elapsed_update_s},
            {"expanded_nodes", r.expanded_nodes},
            {"generated_nodes", r.generated_nodes},
            {"fallback_used", r.fallback_used},
            {"makespan", r.schedule.empty() ? 0 : makespan(r.schedule)},
            {"agents", std::move(agents)},
            {"conflicts", std::move(conflicts)}};
}

nlohmann::json to_json(const ConflictStats& s) {
    auto phase = [](const PhaseCounts& p) {
        nlohmann::json v = nlohmann::json::array(), e = nlohmann::json::array();
        for (const auto& [c, n] : p.vertex) v.push_back({{"cell", to_json(c)}, {"count", n}});
        for (const auto& [k, n] : p.edge) e.push_back({{"cells", {to_json(k.first), to_json(k.second)}}, {"count", n}});
        return nlohmann::json{{"vertex", std::move(v)}, {"edge", std::move(e)}};
    };
    nlohmann::json agents = nlohmann::json::object();
    for (const auto& [id, c] : s.per_agent)
        agents[id] = {{"initial", c.initial}, {"update", c.update}, {"total", c.total()}};
    return {{"runs", s.runs}, {"initial", phase(s.initial)}, {"update", phase(s.update)}, {"per_agent", std::move(agents)}};
}

nlohmann::json to_json(const LayoutSuggestion& s) {
    nlohmann::json hotspots = nlohmann::json::array();
    for (const auto& h : s.hotspots) {
        nlohmann::json cells = nlohmann::json::array();
        for (Cell c : h.cells) cells.push_back(to_json(c));
        hotspots.push_back({{"cells", std::move(cells)}, {"count", h.count}});
    }
    nlohmann::json changes = nlohmann::json::array(), cells = nlohmann::json::array();
    for (const auto& c : s.changes) {
        cells.push_back(to_json(c.cell));
        changes.push_back({{"cell", to_json(c.cell)},
                           {"values", c.values},
                           {"was_obstacle", c.was_obstacle},
                           {"hotspot", c.hotspot},
                           {"rationale", "neutralizes hotspot " + std::to_string(c.hotspot)}});
    }
    return {{"cells", std::move(cells)}, {"target", s.target}, {"hotspots", std::move(hotspots)}, {"changes", std::move(changes)}};
}

std::vector<std::pair<std::string, Deviation>> parse_deviations(std::string_view spec) {
    std::vector<std::pair<std::string, Deviation>> out;
    std::string item;
    std::istringstream in{std::string(spec)};
    while (std::getline(in, item, ';')) {
        item.erase(std::remove_if(item.begin(), item.end(), [](unsigned char ch) { return std::isspace(ch); }), item.end());
        if (item.empty()) continue;
        const auto colon = item.find(':');
        if (colon == std::string::npos || colon == 0) throw ScenarioError("bad deviation '" + item + "'");
        const std::string agent = item.substr(0, colon);
        const std::string what = item.substr(colon + 1);
        Deviation d;
        if (what == "immobile") {
            d.immobile = true;
        } else if (what.rfind("lag=", 0) == 0) {
            try {
                std::size_t used = 0;
                d.lag = std::stoi(what.substr(4), &used);
                if (used != what.size() - 4) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ScenarioError("bad lag in '" + item + "'");
            }
            if (d.lag < 1) throw ScenarioError("lag must be at least 1 in '" + item + "'");
        } else {
            throw ScenarioError("bad deviation '" + item + "'");
        }
        out.emplace_back(agent, d);
    }
    return out;
}

nlohmann::json replan_request(const ExecutionState& state) {
    nlohmann::json positions = nlohmann::json::object(), deviations = nlohmann::json::object();
    for (const auto& [id, c] : state.positions) positions[id] = to_json(c);
    for (const auto& [id, d] : state.deviations) {
        if (d.immobile)
            deviations[id] = "immobile";
        else
            deviations[id] = d.lag;
    }
    return {{"now", state.now}, {"positions", std::move(positions)}, {"deviations", std::move(deviations)}};
}

ExecutionState state_from_request(const Scenario& sc, const PlanResult& planned, const nlohmann::json& request) {
    try {
        ExecutionState state = begin_execution(sc, planned, request.at("now").get<int>());
        if (request.contains("positions"))
            for (const auto& [id, c] : request["positions"].items()) {
                if (!state.positions.contains(id)) throw ScenarioError("unknown agent " + id);
                state.positions[id] = cell_from_json(c);
            }
        if (request.contains("deviations"))
            for (const auto& [id, d] : request["deviations"].items()) {
                Deviation dev;
                if (d.is_string() && d.get<std::string>() == "immobile")
                    dev.immobile = true;
                else
                    dev.lag = d.get<int>();
                state.deviations[id] = dev;
            }
        validate_state(state);
        return state;
    } catch (const nlohmann::json::exception& e) {
        throw ScenarioError(std::string("replan request: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ScenarioError(e.what());
    }
}

}  // namespace sitepath
