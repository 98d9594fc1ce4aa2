#include "msbaco/cli.hpp"

#include "msbaco/config.hpp"
#include "msbaco/correlation.hpp"
#include "msbaco/selector.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

namespace msbaco::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    std::ostringstream out;
    out << std::setprecision(17) << v;
    return out.str();
}

std::string fixed(double v, int digits) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(digits) << v;
    return out.str();
}

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd m;
    if (xs.empty()) return m;
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs) ss += (x - m.mean) * (x - m.mean);
        m.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    }
    return m;
}

/// Collects artifacts in a hidden staging directory and moves them into the
/// output directory only once everything has been written.
class Staging {
public:
    explicit Staging(fs::path out_dir) : out_dir_(std::move(out_dir)) {
        fs::create_directories(out_dir_);
        std::random_device rd;
        std::ostringstream name;
        name << ".staging-" << std::hex << rd() << rd();
        dir_ = out_dir_ / name.str();
        fs::create_directories(dir_);
    }
    Staging(const Staging&) = delete;
    Staging& operator=(const Staging&) = delete;
    ~Staging() {
        std::error_code ec;
        fs::remove_all(dir_, ec);
    }

    void write(const std::string& name, const std::string& contents) {
        std::ofstream out(dir_ / name, std::ios::binary);
        out << contents;
        if (!out) throw Error("failed to write " + (dir_ / name).string());
        names_.push_back(name);
    }

    /// Paths the files will have after commit().
    std::vector<std::string> final_paths() const {
        std::vector<std::string> out;
        for (const auto& n : names_) out.push_back((out_dir_ / n).generic_string());
        return out;
    }

    void commit() {
        for (const auto& n : names_) fs::rename(dir_ / n, out_dir_ / n);
        names_.clear();
    }

private:
    fs::path out_dir_;
    fs::path dir_;
    std::vector<std::string> names_;
};

ExperimentConfig load_config(const RunOptions& opts) {
    ExperimentConfig cfg = parse_config_file(opts.config);
    for (const auto& kv : opts.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ConfigError("override '" + kv + "' is not of the form key=value");
        apply_setting(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opts.heuristic) cfg.design = parse_design(*opts.heuristic);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.seeds < 1) throw ConfigError("--seeds must be at least 1");
    if (opts.jobs < 1) throw ConfigError("--jobs must be at least 1");
    if (cfg.dataset.empty()) throw ConfigError("config does not name a dataset");
    cfg.validate();
    return cfg;
}

Dataset load_checked(const ExperimentConfig& cfg) {
    if (!fs::exists(cfg.dataset)) throw DatasetError("dataset file not found: " + cfg.dataset.string());
    return load_dataset(cfg);
}

/// Runs job(i) for i in [0, count) on up to `jobs` threads; rethrows the
/// first failure by index.
template <typename Job>
void run_parallel(int count, int jobs, Job job) {
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int i = next++; i < count; i = next++) {
            try {
                job(i);
            } catch (...) {
                errors[static_cast<std::size_t>(i)] = std::current_exception();
            }
        }
    };
    const int threads = std::min(jobs, count);
    std::vector<std::thread> pool;
    for (int t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

struct SummaryRow {
    Seed seed;
    double accuracy;
    double test_ce;
    std::size_t width;
    double seconds;
};

const char* kSummaryHeader = "seed,test_accuracy_pct,test_ce,final_width,wall_clock_s\n";

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::ostringstream out;
    out << kSummaryHeader;
    std::vector<double> acc, ce, width, secs;
    for (const auto& r : rows) {
        out << r.seed << ',' << num(100.0 * r.accuracy) << ',' << num(r.test_ce) << ',' << r.width << ','
            << fixed(r.seconds, 3) << '\n';
        acc.push_back(100.0 * r.accuracy);
        ce.push_back(r.test_ce);
        width.push_back(static_cast<double>(r.width));
        secs.push_back(r.seconds);
    }
    auto cell = [](const std::vector<double>& xs, int digits) {
        const auto m = mean_std(xs);
        return fixed(m.mean, digits) + "±" + fixed(m.stddev, digits);
    };
    out << "mean±std," << cell(acc, 2) << ',' << cell(ce, 4) << ',' << cell(width, 2) << ',' << cell(secs, 3)
        << '\n';
    return out.str();
}

nlohmann::json manifest_json(const std::string& command, const ExperimentConfig& cfg,
                             const std::vector<SummaryRow>& rows, std::vector<std::string> artifacts) {
    nlohmann::json summary = nlohmann::json::array();
    for (const auto& r : rows) {
        summary.push_back({{"seed", r.seed},
                           {"test_accuracy", r.accuracy},
                           {"final_width", r.width},
                           {"wall_clock_s", r.seconds}});
    }
    return {{"command", command},
            {"config", config_to_json(cfg)},
            {"seeds", [&] {
                 std::vector<Seed> s;
                 for (const auto& r : rows) s.push_back(r.seed);
                 return s;
             }()},
            {"artifacts", std::move(artifacts)},
            {"summary", std::move(summary)}};
}

std::string curve_csv(const std::vector<GenerationRecord>& curve) {
    std::ostringstream out;
    out << "generation,best_validation_CE,best_objective,best_popcount\n";
    for (const auto& g : curve) {
        out << g.generation << ',' << num(g.best_validation_ce) << ',' << num(g.best_objective) << ','
            << g.best_popcount << '\n';
    }
    return out.str();
}

std::string contributions_csv(const Vector& c) {
    std::ostringstream out;
    out << "neuron,contribution\n";
    for (Eigen::Index i = 0; i < c.size(); ++i) out << i << ',' << num(c(i)) << '\n';
    return out.str();
}

std::string histogram_csv(const Matrix& initial, const Matrix& final_r) {
    constexpr std::size_t bins = 20;
    const auto a = abs_correlation_histogram(initial, bins);
    const auto b = abs_correlation_histogram(final_r, bins);
    std::ostringstream out;
    out << "bin_low,bin_high,initial_count,final_count\n";
    for (std::size_t i = 0; i < bins; ++i) {
        out << fixed(static_cast<double>(i) / bins, 2) << ',' << fixed(static_cast<double>(i + 1) / bins, 2) << ','
            << a[i] << ',' << b[i] << '\n';
    }
    return out.str();
}

template <typename Body>
int guarded(std::ostream& log, Body body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        log << "config error: " << e.what() << '\n';
        return bad_config;
    } catch (const DatasetError& e) {
        log << "dataset error: " << e.what() << '\n';
        return dataset_failure;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << '\n';
        return runtime_failure;
    }
}

}  // namespace

int cmd_run(const RunOptions& opts, std::ostream& log) {
    return guarded(log, [&] {
        const ExperimentConfig base = load_config(opts);
        const Dataset raw = load_checked(base);

        std::vector<ExperimentConfig> configs(static_cast<std::size_t>(opts.seeds), base);
        std::vector<ExperimentResult> results(configs.size());
        for (std::size_t i = 0; i < configs.size(); ++i) configs[i].seed = base.seed + i;

        run_parallel(opts.seeds, opts.jobs, [&](int i) {
            const auto idx = static_cast<std::size_t>(i);
            results[idx] = run_ms_baco(configs[idx], raw);
        });

        Staging staging(opts.out_dir);
        std::vector<SummaryRow> rows;
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            const std::string seed = std::to_string(configs[i].seed);
            staging.write("result_" + seed + ".json", result_to_json(configs[i], r).dump(2) + "\n");
            for (const auto& it : r.iterations) {
                staging.write("curve_iter" + std::to_string(it.index) + "_" + seed + ".csv", curve_csv(it.curve));
            }
            staging.write("contributions_before_" + seed + ".csv", contributions_csv(r.initial_report.contributions));
            staging.write("contributions_after_" + seed + ".csv", contributions_csv(r.final_report.contributions));
            staging.write("r_histogram_" + seed + ".csv",
                          histogram_csv(r.initial_report.correlation, r.final_report.correlation));
            staging.write("network_" + seed + ".json", nlohmann::json(r.final_network).dump() + "\n");
            rows.push_back({configs[i].seed, r.test_accuracy, r.test_ce, r.final_width, r.wall_clock_seconds});
            log << "seed " << seed << ": accuracy " << fixed(100.0 * r.test_accuracy, 2) << "%, width "
                << r.final_width << ", iterations " << r.iterations.size() << ", " << fixed(r.wall_clock_seconds, 2)
                << " s\n";
        }
        staging.write("summary.csv", summary_csv(rows));
        auto artifacts = staging.final_paths();
        artifacts.push_back((opts.out_dir / "manifest.json").generic_string());
        staging.write("manifest.json", manifest_json("run", base, rows, artifacts).dump(2) + "\n");
        staging.commit();
        return static_cast<int>(ok);
    });
}

int cmd_baselines(const RunOptions& opts, std::ostream& log) {
    return guarded(log, [&] {
        const ExperimentConfig base = load_config(opts);
        const Dataset raw = load_checked(base);

        std::vector<ExperimentConfig> configs(static_cast<std::size_t>(opts.seeds), base);
        std::vector<BaselineResult> results(configs.size());
        for (std::size_t i = 0; i < configs.size(); ++i) configs[i].seed = base.seed + i;

        run_parallel(opts.seeds, opts.jobs, [&](int i) {
            const auto idx = static_cast<std::size_t>(i);
            results[idx] = run_baseline(configs[idx], raw);
        });

        Staging staging(opts.out_dir);
        std::vector<SummaryRow> rows;
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            const std::string seed = std::to_string(configs[i].seed);
            nlohmann::json doc = {{"config", config_to_json(configs[i])},
                                  {"final_width", r.width},
                                  {"final_validation_ce", r.validation_ce},
                                  {"epochs", r.epochs},
                                  {"test_accuracy", r.test_accuracy},
                                  {"test_ce", r.test_ce},
                                  {"final_network", r.network}};
            staging.write("baseline_" + seed + ".json", doc.dump(2) + "\n");
            rows.push_back({configs[i].seed, r.test_accuracy, r.test_ce, r.width, r.wall_clock_seconds});
            log << "seed " << seed << ": baseline accuracy " << fixed(100.0 * r.test_accuracy, 2) << "%, width "
                << r.width << '\n';
        }
        staging.write("summary.csv", summary_csv(rows));
        auto artifacts = staging.final_paths();
        artifacts.push_back((opts.out_dir / "manifest.json").generic_string());
        staging.write("manifest.json", manifest_json("baselines", base, rows, artifacts).dump(2) + "\n");
        staging.commit();
        return static_cast<int>(ok);
    });
}

int cmd_analyze(const AnalyzeOptions& opts, std::ostream& log) {
    return guarded(log, [&] {
        ExperimentConfig cfg = opts.config ? parse_config_file(*opts.config) : ExperimentConfig{};
        cfg.dataset = opts.dataset;
        cfg.seed = opts.seed;

        std::ifstream in(opts.network);
        if (!in) throw Error("cannot read network file: " + opts.network.string());
        Network net;
        try {
            net = nlohmann::json::parse(in).get<Network>();
        } catch (const nlohmann::json::exception& e) {
            throw Error(std::string("malformed network JSON: ") + e.what());
        }
        const Dataset raw = load_checked(cfg);
        const AnalysisReport report = analyze_saved(net, raw, cfg);

        fs::path out = opts.out;
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        const fs::path tmp = out.string() + ".tmp";
        {
            std::ofstream f(tmp, std::ios::binary);
            f << nlohmann::json(report).dump(2) << '\n';
            if (!f) throw Error("failed to write " + tmp.string());
        }
        fs::rename(tmp, out);
        log << "wrote " << out.string() << '\n';
        return static_cast<int>(ok);
    });
}

int main(int argc, char** argv) {
    CLI::App app{"Hidden-layer model selection with a binary ant colony"};
    app.require_subcommand(1);

    RunOptions run_opts;
    auto add_run_flags = [](CLI::App* cmd, RunOptions& o) {
        cmd->add_option("--config", o.config, "Experiment config file")->required();
        cmd->add_option("--seeds", o.seeds, "Number of seeds (master seed + 0, 1, ...)");
        cmd->add_option("--jobs", o.jobs, "Seeds run concurrently");
        cmd->add_option("--heuristic", o.heuristic, "H0, H1, H2 or H3");
        cmd->add_option("--seed", o.seed, "Master seed override");
        cmd->add_option("--out-dir", o.out_dir, "Output directory");
        cmd->add_option("--set", o.overrides, "Config override key=value (repeatable)");
    };
    auto* run = app.add_subcommand("run", "Run model selection for one or more seeds");
    add_run_flags(run, run_opts);

    RunOptions base_opts;
    auto* baselines = app.add_subcommand("baselines", "Train the fixed-width network without selection");
    add_run_flags(baselines, base_opts);

    AnalyzeOptions an_opts;
    auto* analyze_cmd = app.add_subcommand("analyze", "Contribution and correlation report for a saved network");
    analyze_cmd->add_option("--network", an_opts.network, "Network JSON")->required();
    analyze_cmd->add_option("--dataset", an_opts.dataset, "Dataset CSV")->required();
    analyze_cmd->add_option("--config", an_opts.config, "Config for CSV and EFAST settings");
    analyze_cmd->add_option("--seed", an_opts.seed, "Master seed of the run that produced the network");
    analyze_cmd->add_option("--out", an_opts.out, "Output JSON path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(bad_config);
    }

    if (*run) return cmd_run(run_opts, std::cerr);
    if (*baselines) return cmd_baselines(base_opts, std::cerr);
    return cmd_analyze(an_opts, std::cerr);
}

}  // namespace msbaco::cli
