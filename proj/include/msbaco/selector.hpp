#pragma once

#include "msbaco/baco.hpp"
#include "msbaco/dataset.hpp"
#include "msbaco/network.hpp"
#include "msbaco/sensitivity.hpp"

#include <json.hpp>

#include <filesystem>

namespace msbaco {

struct ExperimentConfig {
    std::filesystem::path dataset;
    ColumnSelector label_column = -1;
    bool has_header = true;

    std::size_t n_init = 50;
    double learning_rate = 0.1;
    int e_bet = 50;
    int patience = 20;
    int max_epochs = 2000;
    int max_iterations = 20;
    HeuristicDesign design = HeuristicDesign::H3;
    BacoConfig baco;
    EfastSettings efast;
    Seed seed = 1;

    void validate() const;
};

/// Every random stream used by one experiment, derived from the master seed.
struct ExperimentSeeds {
    Seed master;
    Seed split;
    Seed init;
    Seed finetune;
    Seed final_phase;

    Seed train(int iteration) const;
    Seed phase(int iteration) const;
    Seed colony(int iteration) const;

    static ExperimentSeeds derive(Seed master);
};

enum class LoopDecision { proceed, stop };

/// Proceed only when the selected subset is strictly smaller and the cap is not reached.
LoopDecision termination_check(std::size_t prev_width, std::size_t selected_popcount, int iteration = 1,
                               int max_iterations = 20);

struct IterationRecord {
    int index;
    std::size_t width_before;
    std::size_t width_after;
    Mask best_bits;
    double best_validation_ce;
    std::vector<GenerationRecord> curve;
    Vector contributions;
    double seconds;
};

struct ExperimentResult {
    ExperimentSeeds seeds;
    std::vector<IterationRecord> iterations;
    AnalysisReport initial_report;
    AnalysisReport final_report;
    Network final_network;
    std::size_t final_width = 0;
    double final_validation_ce = 0.0;
    int finetune_epochs = 0;
    double test_accuracy = 0.0;
    double test_ce = 0.0;
    double wall_clock_seconds = 0.0;
};

ExperimentResult run_ms_baco(const ExperimentConfig& cfg);
ExperimentResult run_ms_baco(const ExperimentConfig& cfg, const Dataset& raw);

/// Fixed-width network trained to early stopping, no selection.
struct BaselineResult {
    ExperimentSeeds seeds;
    Network network;
    std::size_t width = 0;
    double validation_ce = 0.0;
    int epochs = 0;
    double test_accuracy = 0.0;
    double test_ce = 0.0;
    double wall_clock_seconds = 0.0;
};

BaselineResult run_baseline(const ExperimentConfig& cfg);
BaselineResult run_baseline(const ExperimentConfig& cfg, const Dataset& raw);

Dataset load_dataset(const ExperimentConfig& cfg);

/// The analysis that run_ms_baco stores as final_report, recomputed for a saved network.
AnalysisReport analyze_saved(const Network& net, const Dataset& raw, const ExperimentConfig& cfg);

/// Deterministic JSON for a result; wall-clock time is excluded so reruns match byte for byte.
nlohmann::json result_to_json(const ExperimentConfig& cfg, const ExperimentResult& result);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

}  // namespace msbaco
