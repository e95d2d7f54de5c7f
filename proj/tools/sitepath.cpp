#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

using namespace sitepath::cli;

int main(int argc, char** argv) {
    CLI::App app{"Multi-agent path planning for construction sites"};
    app.require_subcommand(1);

    Overrides o;
    std::string out = "out";
    int repetitions = 1;

    auto add_overrides = [&](CLI::App* sub) {
        sub->add_option("--seed", o.seed, "Random seed");
        sub->add_option("--deadline-s", o.deadline_s, "Realtime deadline in seconds (default 5.0)");
        sub->add_option("--threshold", o.threshold, "Distinct conflicts before the fallback starts");
        sub->add_option("--strategy", o.strategy, "Fallback strategy")
            ->check(CLI::IsMember({"remove", "same-dir", "subregion", "low-cost"}));
    };

    std::string scenario, corpus, schedule, deviations;
    int now = 0;
    std::uint64_t gen_seed = 0;

    auto* solve = app.add_subcommand("solve", "Solve a scenario");
    solve->add_option("scenario", scenario, "Scenario YAML")->required();
    solve->add_option("--out", out, "Output directory");
    add_overrides(solve);

    auto* bench = app.add_subcommand("bench", "Benchmark every scenario in a directory");
    bench->add_option("corpus", corpus, "Directory of scenario YAML files")->required();
    bench->add_option("--repetitions", repetitions, "Runs per scenario")->check(CLI::PositiveNumber);
    bench->add_option("--out", out, "Output CSV")->required();
    add_overrides(bench);

    auto* analyze = app.add_subcommand("analyze", "Conflict heatmaps and optimization advice");
    analyze->add_option("scenario", scenario, "Scenario YAML")->required();
    analyze->add_option("--repetitions", repetitions, "Runs to average")->check(CLI::PositiveNumber);
    analyze->add_option("--out", out, "Output directory");
    add_overrides(analyze);

    auto* rp = app.add_subcommand("replan", "Replan after delays or breakdowns");
    rp->add_option("scenario", scenario, "Scenario YAML")->required();
    rp->add_option("schedule", schedule, "Schedule CSV written by solve")->required();
    rp->add_option("--now", now, "Current timestep")->check(CLI::NonNegativeNumber);
    rp->add_option("--deviations", deviations, "e.g. agent16:lag=2;agent3:immobile");
    rp->add_option("--out", out, "Output directory");
    add_overrides(rp);

    auto* gen = app.add_subcommand("gen-maps", "Write the five archetype scenarios");
    gen->add_option("--seed", gen_seed, "Generator seed");
    gen->add_option("--out", out, "Output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kInputError;
    }

    try {
        if (*solve) return cmd_solve(scenario, out, o);
        if (*bench) return cmd_bench(corpus, repetitions, out, o);
        if (*analyze) return cmd_analyze(scenario, repetitions, out, o);
        if (*rp) return cmd_replan(scenario, schedule, now, deviations, out, o);
        if (*gen) return cmd_gen_maps(out, gen_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kInputError;
    }
    return kInputError;
}
