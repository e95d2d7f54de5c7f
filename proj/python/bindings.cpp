#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "sitepath/analysis.hpp"
#include "sitepath/corpus.hpp"
#include "sitepath/low_level.hpp"
#include "sitepath/replan.hpp"
#include "sitepath/scenario_io.hpp"
#include "sitepath/svg.hpp"

namespace py = pybind11;
using namespace sitepath;

namespace {

py::tuple cell_tuple(Cell c) { return py::make_tuple(c.x, c.y); }

Cell to_cell(const py::sequence& s) {
    if (py::len(s) != 2) throw py::value_error("a cell is an (x, y) pair");
    return {s[0].cast<int>(), s[1].cast<int>()};
}

py::dict schedule_dict(const Schedule& schedule) {
    py::dict out;
    for (const auto& [id, p] : schedule) {
        py::list cells;
        for (Cell c : p.cells) cells.append(cell_tuple(c));
        out[py::str(id)] = cells;
    }
    return out;
}

py::object json_to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

}  // namespace

PYBIND11_MODULE(_sitepath, m) {
    m.doc() = "Multi-agent path planning on weighted construction-site grids";

    py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_ValueError);
    py::register_exception<MapParseError>(m, "MapParseError", PyExc_ValueError);
    py::register_exception<UnsolvableError>(m, "UnsolvableError", PyExc_RuntimeError);
    py::register_exception<UnreachableError>(m, "UnreachableError", PyExc_RuntimeError);
    py::register_exception<NoMidwayError>(m, "NoMidwayError", PyExc_RuntimeError);

    py::class_<WeightedGridMap>(m, "GridMap")
        .def_property_readonly("width", &WeightedGridMap::width)
        .def_property_readonly("height", &WeightedGridMap::height)
        .def_property_readonly("layer_names",
                               [](const WeightedGridMap& g) {
                                   std::vector<std::string> names;
                                   for (const auto& l : g.layers()) names.push_back(l.name);
                                   return names;
                               })
        .def("is_passable", [](const WeightedGridMap& g, const py::sequence& c) { return g.is_passable(to_cell(c)); })
        .def("cell_cost", [](const WeightedGridMap& g, const py::sequence& c) { return g.cell_cost(to_cell(c)); },
             "Cost of entering the cell, or None when it is blocked.")
        .def("serialize", &serialize_map);

    m.def("parse_map", &parse_map, py::arg("text"));
    m.def("load_map", &load_map, py::arg("path"));

    py::class_<Scenario>(m, "Scenario")
        .def_readonly("map", &Scenario::map)
        .def_readwrite("deadline_s", &Scenario::deadline_s)
        .def_readwrite("conflict_threshold", &Scenario::conflict_threshold)
        .def_readwrite("seed", &Scenario::seed)
        .def_property(
            "strategy", [](const Scenario& s) { return std::string(to_string(s.strategy)); },
            [](Scenario& s, const std::string& name) { s.strategy = parse_strategy(name); })
        .def_property_readonly("agents",
                               [](const Scenario& s) {
                                   py::list out;
                                   for (const auto& a : s.agents)
                                       out.append(py::dict(py::arg("id") = a.id, py::arg("start") = cell_tuple(a.start),
                                                           py::arg("goal") = cell_tuple(a.goal),
                                                           py::arg("priority") = a.priority));
                                   return out;
                               })
        .def("without_agents",
             [](const Scenario& s, const std::vector<std::string>& ids) {
                 Scenario out = s;
                 std::erase_if(out.agents, [&](const Agent& a) { return std::find(ids.begin(), ids.end(), a.id) != ids.end(); });
                 return out;
             })
        .def("with_map", [](const Scenario& s, const WeightedGridMap& g) {
            Scenario out = s;
            out.map = g;
            validate_scenario(out);
            return out;
        });

    m.def("load_scenario", &load_scenario, py::arg("path"));
    m.def("parse_scenario", &parse_scenario, py::arg("yaml"), py::arg("base_dir") = ".");
    m.def("make_archetype", &make_archetype, py::arg("archetype"), py::arg("seed") = 1);
    m.def("make_bottleneck", &make_bottleneck, py::arg("seed") = 1);
    m.def("make_bridging_scenario", &make_bridging_scenario);
    m.def("make_sole_corridor_scenario", &make_sole_corridor_scenario);
    m.def("write_corpus", &write_corpus, py::arg("out_dir"), py::arg("seed"));

    m.def(
        "shortest_path",
        [](const WeightedGridMap& g, const py::sequence& start, const py::sequence& goal) {
            const TimedPath p = bidirectional_astar(g, to_cell(start), to_cell(goal));
            py::list cells;
            for (Cell c : p.cells) cells.append(cell_tuple(c));
            return py::make_tuple(cells, p.cost());
        },
        py::arg("map"), py::arg("start"), py::arg("goal"), "Cheapest path and its cost, ignoring other agents.");

    py::class_<PlanResult>(m, "PlanResult")
        .def_property_readonly("status", [](const PlanResult& r) { return std::string(to_string(r.status)); })
        .def_readonly("total_cost", &PlanResult::total_cost)
        .def_readonly("removed_agents", &PlanResult::removed_agents)
        .def_readonly("elapsed_initial_s", &PlanResult::elapsed_initial_s)
        .def_readonly("elapsed_update_s", &PlanResult::elapsed_update_s)
        .def_readonly("fallback_used", &PlanResult::fallback_used)
        .def_property_readonly("schedule", [](const PlanResult& r) { return schedule_dict(r.schedule); })
        .def_property_readonly("conflict_count", [](const PlanResult& r) { return find_conflicts(r.schedule).size(); })
        .def(
            "to_json", [](const PlanResult& r, const Scenario& sc) { return json_to_py(to_json(r, agent_ids(sc))); },
            py::arg("scenario"))
        .def(
            "to_csv", [](const PlanResult& r, const Scenario& sc) { return schedule_to_csv(r.schedule, agent_ids(sc)); },
            py::arg("scenario"))
        .def(
            "to_svg",
            [](const PlanResult& r, const Scenario& sc, const std::string& title) { return paths_svg(sc.map, r.schedule, title); },
            py::arg("scenario"), py::arg("title") = "paths");

    m.def("solve", [](const Scenario& sc) { return solve(sc); }, py::arg("scenario"),
          py::call_guard<py::gil_scoped_release>());

    py::class_<ConflictStats>(m, "ConflictStats")
        .def_readonly("runs", &ConflictStats::runs)
        .def("to_json", [](const ConflictStats& s) { return json_to_py(to_json(s)); });
    m.def("collect_stats", [](const Scenario& sc, int reps) { return collect_stats(sc, reps); }, py::arg("scenario"),
          py::arg("repetitions") = 1, py::call_guard<py::gil_scoped_release>());
    m.def("suggest_removal", &suggest_removal, py::arg("stats"), py::arg("k") = 1);

    py::class_<LayoutSuggestion>(m, "LayoutSuggestion")
        .def_property_readonly("cells",
                               [](const LayoutSuggestion& s) {
                                   py::list out;
                                   for (Cell c : s.cells()) out.append(cell_tuple(c));
                                   return out;
                               })
        .def("to_json", [](const LayoutSuggestion& s) { return json_to_py(to_json(s)); });
    m.def("suggest_layout", &suggest_layout, py::arg("map"), py::arg("stats"), py::arg("k") = 1);
    m.def("apply_layout", &apply_layout, py::arg("map"), py::arg("suggestion"));

    py::class_<ExecutionState>(m, "ExecutionState")
        .def_readonly("now", &ExecutionState::now)
        .def_property_readonly("positions", [](const ExecutionState& s) {
            py::dict out;
            for (const auto& [id, c] : s.positions) out[py::str(id)] = cell_tuple(c);
            return out;
        });
    m.def("begin_execution", &begin_execution, py::arg("scenario"), py::arg("planned"), py::arg("now"));
    m.def(
        "inject_delay",
        [](const ExecutionState& s, const std::string& agent, int lag, bool immobile) {
            return inject_delay(s, agent, Deviation{lag, immobile});
        },
        py::arg("state"), py::arg("agent"), py::arg("lag") = 0, py::arg("immobile") = false);

    py::class_<ReplanResult>(m, "ReplanResult")
        .def_readonly("plan", &ReplanResult::plan)
        .def_readonly("changed_agents", &ReplanResult::changed_agents)
        .def_readonly("troublemakers", &ReplanResult::troublemakers)
        .def_readonly("stop_all", &ReplanResult::stop_all)
        .def_property_readonly("midway_goals", [](const ReplanResult& r) {
            py::dict out;
            for (const auto& [id, c] : r.midway_goals) out[py::str(id)] = cell_tuple(c);
            return out;
        });
    m.def("replan", &replan, py::arg("state"), py::arg("deadline_s") = kDefaultDeadlineS,
          py::call_guard<py::gil_scoped_release>());
}
