#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace msbaco::cli {

enum ExitCode : int {
    ok = 0,
    runtime_failure = 1,
    bad_config = 2,
    dataset_failure = 3,
};

struct RunOptions {
    std::filesystem::path config;
    std::filesystem::path out_dir = "out";
    int seeds = 1;
    int jobs = 1;
    std::optional<std::string> heuristic;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;  // "key=value"
};

struct AnalyzeOptions {
    std::filesystem::path network;
    std::filesystem::path dataset;
    std::optional<std::filesystem::path> config;
    std::uint64_t seed = 1;
    std::filesystem::path out = "analysis.json";
};

int cmd_run(const RunOptions& opts, std::ostream& log);
int cmd_baselines(const RunOptions& opts, std::ostream& log);
int cmd_analyze(const AnalyzeOptions& opts, std::ostream& log);

/// Full command-line entry point (`run`, `analyze`, `baselines`).
int main(int argc, char** argv);

}  // namespace msbaco::cli
