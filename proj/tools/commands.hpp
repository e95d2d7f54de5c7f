#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "sitepath/cbs.hpp"

namespace sitepath::cli {

enum Exit : int { kOk = 0, kInputError = 1, kStopAll = 2 };

/// Flags that override the corresponding scenario fields when set.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> deadline_s;
    std::optional<int> threshold;
    std::optional<std::string> strategy;

    void apply(Scenario& sc) const;
};

int cmd_solve(const std::string& scenario_path, const std::string& out_dir, const Overrides& o);
int cmd_bench(const std::string& corpus_dir, int repetitions, const std::string& out_csv, const Overrides& o);
int cmd_analyze(const std::string& scenario_path, int repetitions, const std::string& out_dir, const Overrides& o);
int cmd_replan(const std::string& scenario_path, const std::string& schedule_path, int now,
               const std::string& deviation_spec, const std::string& out_dir, const Overrides& o);
int cmd_gen_maps(const std::string& out_dir, std::uint64_t seed);

}  // namespace sitepath::cli
