#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "sitepath/analysis.hpp"
#include "sitepath/corpus.hpp"
#include "sitepath/replan.hpp"
#include "sitepath/scenario_io.hpp"
#include "sitepath/svg.hpp"

namespace fs = std::filesystem;

namespace sitepath::cli {

namespace {

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioError("cannot open " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

std::string fixed(double v, int digits) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
}

// Hotspot clusters considered by analyze.
constexpr std::size_t kLayoutClusters = 1;

int exit_for(PlanStatus s) { return s == PlanStatus::stop_all ? kStopAll : kOk; }

int severity(PlanStatus s) {
    switch (s) {
        case PlanStatus::optimal: return 0;
        case PlanStatus::feasible_after_removal: return 1;
        case PlanStatus::stop_all: return 2;
    }
    return 0;
}

nlohmann::json durations(const PlanResult& r) {
    return {{"initial_s", r.elapsed_initial_s},
            {"update_s", r.elapsed_update_s},
            {"total_s", r.elapsed_initial_s + r.elapsed_update_s},
            {"status", to_string(r.status)},
            {"total_cost", r.total_cost}};
}

void write_plan(const fs::path& dir, const Scenario& sc, const PlanResult& r, const std::string& title) {
    const auto ids = agent_ids(sc);
    write_file(dir / "schedule.csv", schedule_to_csv(r.schedule, ids));
    write_file(dir / "plan.json", to_json(r, ids).dump(2) + "\n");
    write_file(dir / "paths.svg", paths_svg(sc.map, r.schedule, title));
}

}  // namespace

void Overrides::apply(Scenario& sc) const {
    if (seed) sc.seed = *seed;
    if (deadline_s) sc.deadline_s = *deadline_s;
    if (threshold) sc.conflict_threshold = *threshold;
    if (strategy) sc.strategy = parse_strategy(*strategy);
    validate_scenario(sc);
}

int cmd_solve(const std::string& scenario_path, const std::string& out_dir, const Overrides& o) {
    Scenario sc = load_scenario(scenario_path);
    o.apply(sc);
    const PlanResult r = solve(sc);
    fs::create_directories(out_dir);
    write_plan(out_dir, sc, r, fs::path(scenario_path).stem().string());
    std::cout << to_string(r.status) << " cost=" << r.total_cost << " removed=" << r.removed_agents.size()
              << " initial_s=" << fixed(r.elapsed_initial_s, 4) << " update_s=" << fixed(r.elapsed_update_s, 4) << "\n";
    return exit_for(r.status);
}

int cmd_bench(const std::string& corpus_dir, int repetitions, const std::string& out_csv, const Overrides& o) {
    if (repetitions < 1) throw ScenarioError("repetitions must be at least 1");
    std::vector<fs::path> files;
    if (fs::is_directory(corpus_dir))
        for (const auto& e : fs::directory_iterator(corpus_dir))
            if (e.path().extension() == ".yaml" || e.path().extension() == ".yml") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) {
        std::cerr << "no scenarios in " << corpus_dir << "\n";
        return kInputError;
    }

    std::string csv = "map,agents,initial_search_s,update_s,total_cost,conflicts_initial,conflicts_update,status,seed\n";
    int succeeded = 0;
    for (const auto& file : files) {
        const std::string name = file.stem().string();
        try {
            Scenario sc = load_scenario(file.string());
            o.apply(sc);
            std::vector<PlanResult> runs;
            collect_stats(sc, repetitions, &runs);
            double init = 0, upd = 0, cost = 0, ci = 0, cu = 0;
            PlanStatus worst = PlanStatus::optimal;
            for (const auto& r : runs) {
                init += r.elapsed_initial_s;
                upd += r.elapsed_update_s;
                cost += r.total_cost;
                for (const auto& c : r.conflict_log) (c.phase == ConflictPhase::initial ? ci : cu) += 1.0;
                if (severity(r.status) > severity(worst)) worst = r.status;
            }
            const double n = static_cast<double>(runs.size());
            csv += name + "," + std::to_string(sc.agents.size()) + "," + fixed(init / n, 6) + "," + fixed(upd / n, 6) +
                   "," + fixed(round1(cost / n), 1) + "," + fixed(round1(ci / n), 1) + "," + fixed(round1(cu / n), 1) +
                   "," + std::string(to_string(worst)) + "," + std::to_string(sc.seed) + "\n";
            ++succeeded;
        } catch (const std::exception& e) {
            std::cerr << name << ": " << e.what() << "\n";
            csv += name + ",0,0,0,0,0,0,error,0\n";
        }
    }
    if (!fs::path(out_csv).parent_path().empty()) fs::create_directories(fs::path(out_csv).parent_path());
    write_file(out_csv, csv);
    return succeeded > 0 ? kOk : kInputError;
}

int cmd_analyze(const std::string& scenario_path, int repetitions, const std::string& out_dir, const Overrides& o) {
    Scenario sc = load_scenario(scenario_path);
    o.apply(sc);
    std::vector<PlanResult> runs;
    const ConflictStats stats = collect_stats(sc, repetitions, &runs);
    const LayoutSuggestion layout = suggest_layout(sc.map, stats, kLayoutClusters);
    const auto removal = suggest_removal(stats, 1);

    fs::create_directories(out_dir);
    const fs::path dir(out_dir);
    write_file(dir / "heatmap_vertex_initial.svg", vertex_heatmap_svg(sc.map, stats.initial.vertex, "vertex conflicts, initial"));
    write_file(dir / "heatmap_vertex_update.svg", vertex_heatmap_svg(sc.map, stats.update.vertex, "vertex conflicts, update"));
    write_file(dir / "heatmap_edge_initial.svg", edge_heatmap_svg(sc.map, stats.initial.edge, "edge conflicts, initial"));
    write_file(dir / "heatmap_edge_update.svg", edge_heatmap_svg(sc.map, stats.update.edge, "edge conflicts, update"));
    write_file(dir / "stats.json", to_json(stats).dump(2) + "\n");
    write_file(dir / "layout.json", to_json(layout).dump(2) + "\n");
    write_file(dir / "removal.json", nlohmann::json{{"remove", removal}}.dump(2) + "\n");

    nlohmann::json baseline{{"runs", runs.size()}};
    double init = 0, upd = 0;
    for (const auto& r : runs) {
        init += r.elapsed_initial_s;
        upd += r.elapsed_update_s;
    }
    baseline["initial_s"] = init / static_cast<double>(runs.size());
    baseline["update_s"] = upd / static_cast<double>(runs.size());
    baseline["total_s"] = (init + upd) / static_cast<double>(runs.size());

    nlohmann::json report{{"baseline", baseline}};
    if (layout.empty()) {
        report["layout"] = {{"optimization", "None"}};
    } else {
        Scenario changed = sc;
        changed.map = apply_layout(sc.map, layout);
        report["layout"] = durations(solve(changed));
        report["layout"]["optimization"] = "layout";
        report["layout"]["cells"] = layout.changes.size();
    }
    if (removal.empty()) {
        report["removal"] = {{"optimization", "None"}};
    } else {
        Scenario fewer = sc;
        std::erase_if(fewer.agents, [&](const Agent& a) { return a.id == removal.front(); });
        report["removal"] = fewer.agents.empty() ? nlohmann::json{{"status", "optimal"}, {"total_s", 0.0}}
                                                 : durations(solve(fewer));
        report["removal"]["optimization"] = "removal";
        report["removal"]["removed"] = removal;
    }
    write_file(dir / "report.json", report.dump(2) + "\n");
    std::cout << "hotspots=" << layout.hotspots.size() << " layout_cells=" << layout.changes.size()
              << " remove=" << (removal.empty() ? "None" : removal.front()) << "\n";
    return kOk;
}

int cmd_replan(const std::string& scenario_path, const std::string& schedule_path, int now,
               const std::string& deviation_spec, const std::string& out_dir, const Overrides& o) {
    Scenario sc = load_scenario(scenario_path);
    o.apply(sc);
    PlanResult planned;
    planned.schedule = schedule_from_rows(parse_schedule_csv(read_file(schedule_path)), sc);
    if (!find_conflicts(planned.schedule).empty()) throw ScenarioError("schedule has conflicts");
    for (const auto& a : sc.agents)
        if (planned.schedule.at(a.id).cells.size() == 1 && a.start != a.goal) planned.removed_agents.push_back(a.id);
    planned.status = planned.removed_agents.empty() ? PlanStatus::optimal : PlanStatus::feasible_after_removal;
    planned.total_cost = sic(planned.schedule);

    ExecutionState state = begin_execution(sc, planned, now);
    for (const auto& [agent, dev] : parse_deviations(deviation_spec)) state = inject_delay(state, agent, dev);
    const ReplanResult rr = replan(state, sc.deadline_s);

    fs::create_directories(out_dir);
    write_plan(out_dir, sc, rr.plan, fs::path(scenario_path).stem().string() + " replan");
    nlohmann::json midway = nlohmann::json::object();
    for (const auto& [id, c] : rr.midway_goals) midway[id] = to_json(c);
    const nlohmann::json diff{{"now", now},
                              {"changed_agents", rr.changed_agents},
                              {"midway_goals", midway},
                              {"troublemakers", rr.troublemakers},
                              {"stop_all", rr.stop_all}};
    write_file(fs::path(out_dir) / "diff.json", diff.dump(2) + "\n");
    write_file(fs::path(out_dir) / "request.json", replan_request(state).dump(2) + "\n");
    std::cout << to_string(rr.plan.status) << " changed=" << rr.changed_agents.size()
              << " midway=" << rr.midway_goals.size() << (rr.stop_all ? " stop_all" : "") << "\n";
    return rr.stop_all ? kStopAll : kOk;
}

int cmd_gen_maps(const std::string& out_dir, std::uint64_t seed) {
    write_corpus(out_dir, seed);
    return kOk;
}

}  // namespace sitepath::cli
