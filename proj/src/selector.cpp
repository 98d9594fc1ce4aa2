#include "msbaco/selector.hpp"

#include "msbaco/correlation.hpp"
#include "msbaco/rng.hpp"

#include <chrono>

namespace msbaco {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

TrainConfig finetune_config(const ExperimentConfig& cfg, Seed seed) {
    return {cfg.learning_rate, cfg.max_epochs, cfg.patience, seed};
}

EfastSettings efast_with_seed(const ExperimentConfig& cfg, Seed seed) {
    EfastSettings s = cfg.efast;
    s.phase_seed = seed;
    return s;
}

nlohmann::json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

void ExperimentConfig::validate() const {
    if (n_init < 1) throw ConfigError("n_init must be at least 1");
    if (e_bet < 1) throw ConfigError("e_bet must be at least 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
    if (patience < 1) throw ConfigError("patience must be at least 1");
    if (max_epochs < 0) throw ConfigError("max_epochs must be non-negative");
    if (max_iterations < 1) throw ConfigError("max_iterations must be at least 1");
    baco.validate();
    efast.plan(2, 0).validate();
}

ExperimentSeeds ExperimentSeeds::derive(Seed master) {
    return {master, derive_seed(master, Stream::split), derive_seed(master, Stream::init),
            derive_seed(master, Stream::finetune), derive_seed(master, Stream::final_phase)};
}

Seed ExperimentSeeds::train(int iteration) const {
    return derive_seed(derive_seed(master, Stream::train), static_cast<std::uint64_t>(iteration));
}

Seed ExperimentSeeds::phase(int iteration) const {
    return derive_seed(derive_seed(master, Stream::phase), static_cast<std::uint64_t>(iteration));
}

Seed ExperimentSeeds::colony(int iteration) const {
    return derive_seed(derive_seed(master, Stream::colony), static_cast<std::uint64_t>(iteration));
}

LoopDecision termination_check(std::size_t prev_width, std::size_t selected_popcount, int iteration,
                               int max_iterations) {
    if (prev_width < 1) throw Error("termination_check: width must be at least 1");
    if (selected_popcount > prev_width) {
        throw Error("termination_check: selected subset larger than the current layer");
    }
    if (selected_popcount >= prev_width) return LoopDecision::stop;
    if (iteration >= max_iterations) return LoopDecision::stop;
    return LoopDecision::proceed;
}

Dataset load_dataset(const ExperimentConfig& cfg) {
    return load_csv(cfg.dataset, CsvOptions{cfg.label_column, cfg.has_header});
}

ExperimentResult run_ms_baco(const ExperimentConfig& cfg) { return run_ms_baco(cfg, load_dataset(cfg)); }

ExperimentResult run_ms_baco(const ExperimentConfig& cfg, const Dataset& raw) {
    cfg.validate();
    const auto start = Clock::now();

    ExperimentResult result;
    result.seeds = ExperimentSeeds::derive(cfg.seed);
    const PreparedData data = prepare(raw, result.seeds.split);

    Network net = init_network(data.dataset.feature_count(), cfg.n_init, data.dataset.class_count(),
                               result.seeds.init);

    for (int iteration = 1;; ++iteration) {
        const auto iter_start = Clock::now();
        const Seed train_seed = result.seeds.train(iteration);
        for (int epoch = 1; epoch <= cfg.e_bet; ++epoch) {
            TrainConfig tc{cfg.learning_rate, 1, cfg.patience, derive_seed(train_seed, static_cast<std::uint64_t>(epoch))};
            net = sgd_epoch(std::move(net), data.train.x, data.train.targets, tc);
        }

        const AnalysisReport report = analyze(net, data.train.x, efast_with_seed(cfg, result.seeds.phase(iteration)));
        if (iteration == 1) result.initial_report = report;

        const BacoResult colony = run_baco(net, data.validation.x, data.validation.targets, report, cfg.baco,
                                           cfg.design, result.seeds.colony(iteration));

        const std::size_t width = net.hidden();
        const std::size_t selected = popcount(colony.best.bits);
        const LoopDecision decision = termination_check(width, selected, iteration, cfg.max_iterations);
        if (selected < width) net = prune(net, colony.best.bits);

        result.iterations.push_back({iteration, width, net.hidden(), colony.best.bits, colony.best.validation_ce,
                                     colony.curve, report.contributions, seconds_since(iter_start)});
        if (decision == LoopDecision::stop) break;
    }

    const TrainResult tuned = train_with_early_stopping(net, data.train.x, data.train.targets, data.validation.x,
                                                        data.validation.targets,
                                                        finetune_config(cfg, result.seeds.finetune));
    result.final_network = tuned.net;
    result.final_width = tuned.net.hidden();
    result.final_validation_ce = tuned.validation_ce;
    result.finetune_epochs = tuned.epochs_run;
    result.final_report = analyze(tuned.net, data.train.x, efast_with_seed(cfg, result.seeds.final_phase));

    const Matrix probs = forward(tuned.net, data.test.x);
    result.test_accuracy = accuracy(probs, data.test.labels);
    result.test_ce = cross_entropy(probs, data.test.targets);
    result.wall_clock_seconds = seconds_since(start);
    return result;
}

BaselineResult run_baseline(const ExperimentConfig& cfg) { return run_baseline(cfg, load_dataset(cfg)); }

BaselineResult run_baseline(const ExperimentConfig& cfg, const Dataset& raw) {
    cfg.validate();
    const auto start = Clock::now();
    BaselineResult out;
    out.seeds = ExperimentSeeds::derive(cfg.seed);
    const PreparedData data = prepare(raw, out.seeds.split);
    const Network net = init_network(data.dataset.feature_count(), cfg.n_init, data.dataset.class_count(),
                                     out.seeds.init);
    const TrainResult tuned = train_with_early_stopping(net, data.train.x, data.train.targets, data.validation.x,
                                                        data.validation.targets,
                                                        finetune_config(cfg, out.seeds.finetune));
    out.network = tuned.net;
    out.width = tuned.net.hidden();
    out.validation_ce = tuned.validation_ce;
    out.epochs = tuned.epochs_run;
    const Matrix probs = forward(tuned.net, data.test.x);
    out.test_accuracy = accuracy(probs, data.test.labels);
    out.test_ce = cross_entropy(probs, data.test.targets);
    out.wall_clock_seconds = seconds_since(start);
    return out;
}

AnalysisReport analyze_saved(const Network& net, const Dataset& raw, const ExperimentConfig& cfg) {
    const auto seeds = ExperimentSeeds::derive(cfg.seed);
    const PreparedData data = prepare(raw, seeds.split);
    if (data.dataset.feature_count() != net.inputs() || data.dataset.class_count() != net.outputs()) {
        throw DimensionError("network expects " + std::to_string(net.inputs()) + " features and " +
                             std::to_string(net.outputs()) + " classes; dataset has " +
                             std::to_string(data.dataset.feature_count()) + " and " +
                             std::to_string(data.dataset.class_count()));
    }
    return analyze(net, data.train.x, efast_with_seed(cfg, seeds.final_phase));
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    nlohmann::json label;
    if (const auto* name = std::get_if<std::string>(&cfg.label_column)) {
        label = *name;
    } else {
        label = std::get<int>(cfg.label_column);
    }
    return {{"dataset", cfg.dataset.generic_string()},
            {"label_column", label},
            {"header", cfg.has_header},
            {"n_init", cfg.n_init},
            {"learning_rate", cfg.learning_rate},
            {"e_bet", cfg.e_bet},
            {"patience", cfg.patience},
            {"max_epochs", cfg.max_epochs},
            {"max_iterations", cfg.max_iterations},
            {"heuristic", std::string(to_string(cfg.design))},
            {"alpha", cfg.baco.alpha},
            {"beta", cfg.baco.beta},
            {"rho", cfg.baco.rho},
            {"ants", cfg.baco.ants},
            {"generations", cfg.baco.generations},
            {"tau0", cfg.baco.tau0},
            {"efast_interference", cfg.efast.interference},
            {"efast_samples", cfg.efast.samples},
            {"efast_focal_frequency", cfg.efast.focal_frequency},
            {"seed", cfg.seed}};
}

nlohmann::json result_to_json(const ExperimentConfig& cfg, const ExperimentResult& result) {
    nlohmann::json iterations = nlohmann::json::array();
    for (const auto& it : result.iterations) {
        nlohmann::json curve = nlohmann::json::array();
        for (const auto& g : it.curve) {
            curve.push_back({{"generation", g.generation},
                             {"best_validation_ce", g.best_validation_ce},
                             {"best_objective", g.best_objective},
                             {"best_popcount", g.best_popcount}});
        }
        iterations.push_back({{"iteration", it.index},
                              {"width_before", it.width_before},
                              {"width_after", it.width_after},
                              {"best_bits", to_string(it.best_bits)},
                              {"best_validation_ce", it.best_validation_ce},
                              {"contributions", vector_json(it.contributions)},
                              {"curve", std::move(curve)}});
    }
    const auto& s = result.seeds;
    nlohmann::json seeds = {{"master", s.master},
                            {"split", s.split},
                            {"init", s.init},
                            {"finetune", s.finetune},
                            {"final_phase", s.final_phase}};
    nlohmann::json per_iteration = nlohmann::json::array();
    for (const auto& it : result.iterations) {
        per_iteration.push_back(
            {{"train", s.train(it.index)}, {"phase", s.phase(it.index)}, {"colony", s.colony(it.index)}});
    }
    seeds["iterations"] = std::move(per_iteration);

    return {{"config", config_to_json(cfg)},
            {"seeds", std::move(seeds)},
            {"iterations", std::move(iterations)},
            {"initial_analysis", result.initial_report},
            {"final_analysis", result.final_report},
            {"initial_abs_r_histogram", abs_correlation_histogram(result.initial_report.correlation)},
            {"final_abs_r_histogram", abs_correlation_histogram(result.final_report.correlation)},
            {"final_width", result.final_width},
            {"final_validation_ce", result.final_validation_ce},
            {"finetune_epochs", result.finetune_epochs},
            {"test_accuracy", result.test_accuracy},
            {"test_ce", result.test_ce},
            {"final_network", result.final_network}};
}

}  // namespace msbaco
