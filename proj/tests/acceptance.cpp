// Acceptance criteria: one PASS/FAIL line each, nonzero exit if any fails.
#include "msbaco/baco.hpp"
#include "msbaco/cli.hpp"
#include "msbaco/config.hpp"
#include "msbaco/selector.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>

namespace fs = std::filesystem;
using namespace msbaco;

namespace {

const fs::path kRoot = MSBACO_SOURCE_DIR;
constexpr int kSeeds = 10;
constexpr double pi = std::numbers::pi;

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

template <class F>
void parallel_for(int n, F body) {
    const int jobs = std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int t = 0; t < std::min(jobs, n); ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) body(i);
        });
    }
    for (auto& th : pool) th.join();
}

struct Summary {
    double accuracy_pct = 0;
    double width = 0;
};

Summary run_seeds(const ExperimentConfig& base, bool baseline) {
    const Dataset raw = load_dataset(base);
    std::vector<double> acc(kSeeds), width(kSeeds);
    parallel_for(kSeeds, [&](int i) {
        ExperimentConfig cfg = base;
        cfg.seed = base.seed + static_cast<Seed>(i);
        if (baseline) {
            const auto r = run_baseline(cfg, raw);
            acc[i] = r.test_accuracy;
            width[i] = static_cast<double>(r.width);
        } else {
            const auto r = run_ms_baco(cfg, raw);
            acc[i] = r.test_accuracy;
            width[i] = static_cast<double>(r.final_width);
        }
    });
    Summary s;
    for (int i = 0; i < kSeeds; ++i) {
        s.accuracy_pct += 100.0 * acc[i] / kSeeds;
        s.width += width[i] / kSeeds;
    }
    return s;
}

ExperimentConfig dataset_config(const std::string& name) {
    return parse_config_file(kRoot / "configs" / (name + ".toml"));
}

double sample_loss(const Network& net, const Vector& x, const Vector& d) {
    Matrix row = x.transpose();
    Matrix t = d.transpose();
    return cross_entropy(forward(net, row), t);
}

double worst_gradient_error() {
    Rng rng(6);
    constexpr double h = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto I = 1 + rng.index(4), N = 1 + rng.index(4), K = 2 + rng.index(3);
        const Network net = init_network(I, N, K, rng.next());
        Vector x(static_cast<Eigen::Index>(I));
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        Vector d = Vector::Zero(static_cast<Eigen::Index>(K));
        d(static_cast<Eigen::Index>(rng.index(K))) = 1.0;
        const Gradient g = sample_gradient(net, x, d);
        auto check = [&](auto member, const auto& analytic) {
            for (Eigen::Index i = 0; i < analytic.size(); ++i) {
                Network plus = net, minus = net;
                (plus.*member).data()[i] += h;
                (minus.*member).data()[i] -= h;
                const double numeric = (sample_loss(plus, x, d) - sample_loss(minus, x, d)) / (2 * h);
                const double a = analytic.data()[i];
                const double scale = std::max(std::abs(a), std::abs(numeric));
                worst = std::max(worst, scale < 1e-6 ? std::abs(a - numeric) : std::abs(a - numeric) / scale);
            }
        };
        check(&Network::w, g.w);
        check(&Network::b0, g.b0);
        check(&Network::v, g.v);
        check(&Network::b1, g.b1);
    }
    return worst;
}

double worst_efast_error() {
    double worst = 0.0;
    const ScalarModel additive = [](std::span<const double> u) { return 2 * u[0] + u[1]; };
    const auto plan2 = EfastPlan::defaults(2, 31);
    const FactorRanges unit(2, Range{0.0, 1.0});
    worst = std::max(worst, std::abs(total_effect(additive, plan2, unit, 0) - 0.8));
    worst = std::max(worst, std::abs(total_effect(additive, plan2, unit, 1) - 0.2));

    const double a = 7.0, b = 0.1;
    const ScalarModel ishigami = [&](std::span<const double> x) {
        return std::sin(x[0]) + a * std::pow(std::sin(x[1]), 2) + b * std::pow(x[2], 4) * std::sin(x[0]);
    };
    const double v = a * a / 8 + b * std::pow(pi, 4) / 5 + b * b * std::pow(pi, 8) / 18 + 0.5;
    const double v1 = 0.5 * std::pow(1 + b * std::pow(pi, 4) / 5, 2);
    const double v13 = b * b * std::pow(pi, 8) * (1.0 / 18 - 1.0 / 50);
    const double te[3] = {(v1 + v13) / v, a * a / 8 / v, v13 / v};
    const auto plan3 = EfastPlan::defaults(3, 31);
    const FactorRanges box(3, Range{-pi, pi});
    for (std::size_t f = 0; f < 3; ++f)
        worst = std::max(worst, std::abs(total_effect(ishigami, plan3, box, f) - te[f]));
    return worst;
}

double worst_mask_prune_gap() {
    Rng rng(8);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto N = 1 + rng.index(12);
        const Network net = init_network(1 + rng.index(6), N, 2 + rng.index(3), rng.next());
        Mask mask(N);
        for (auto& bit : mask) bit = rng.uniform() < 0.5;
        mask[rng.index(N)] = 1;
        Matrix x(15, static_cast<Eigen::Index>(net.inputs()));
        for (auto& v : x.reshaped()) v = rng.uniform(-3, 3);
        worst = std::max(worst, (apply_mask(net, mask, x) - forward(prune(net, mask), x)).cwiseAbs().maxCoeff());
    }
    return worst;
}

int brute_force_hits() {
    Rng rng(9);
    int hits = 0;
    const BacoConfig cfg;
    for (int run = 0; run < 100; ++run) {
        const auto N = 1 + rng.index(4);
        Network net = init_network(3, N, 3, rng.next());
        net.v *= 3.0;
        Matrix xt(30, 3), xv(20, 3);
        for (auto& v : xt.reshaped()) v = rng.uniform(-2, 2);
        for (auto& v : xv.reshaped()) v = rng.uniform(-2, 2);
        Matrix tv = Matrix::Zero(20, 3);
        for (Eigen::Index r = 0; r < 20; ++r) tv(r, static_cast<Eigen::Index>(rng.index(3))) = 1.0;

        double truth = INFINITY;
        for (std::size_t code = 1; code < (std::size_t{1} << N); ++code) {
            Mask bits(N);
            for (std::size_t i = 0; i < N; ++i) bits[i] = (code >> i) & 1U;
            truth = std::min(truth, cross_entropy(apply_mask(net, bits, xv), tv));
        }
        const auto result = run_baco(net, xv, tv, analyze(net, xt), cfg, HeuristicDesign::H3, rng.next());
        if (std::abs(result.best.validation_ce - truth) <= 1e-12 * std::max(1.0, truth)) ++hits;
    }
    return hits;
}

void pheromone_bounds() {
    // A 30-generation colony on a partially trained iris network.
    const ExperimentConfig cfg = dataset_config("iris");
    const PreparedData data = prepare(load_dataset(cfg), 1);
    Network net = init_network(static_cast<std::size_t>(data.train.x.cols()), cfg.n_init,
                               static_cast<std::size_t>(data.train.targets.cols()), 2);
    for (int e = 0; e < cfg.e_bet; ++e)
        net = sgd_epoch(net, data.train.x, data.train.targets, {cfg.learning_rate, 1, 1, derive_seed(3, static_cast<std::uint64_t>(e))});
    EfastSettings efast = cfg.efast;
    efast.phase_seed = 4;
    const AnalysisReport rep = analyze(net, data.train.x, efast);

    double max_obj = 0.0, last = 0.0, lowest = INFINITY, highest = 0.0;
    bool bounded = true, monotone = true;
    int generations = 0;
    std::ostringstream log;
    run_baco(net, data.validation.x, data.validation.targets, rep, cfg.baco, cfg.design, 5,
             [&](int g, const PheromoneMatrix& pher, const BitSolution& best) {
                 max_obj = std::max(max_obj, *best.objective);
                 lowest = std::min(lowest, pher.min_edge());
                 highest = std::max(highest, pher.max_edge());
                 bounded &= pher.min_edge() >= cfg.baco.tau0 && pher.max_edge() <= max_obj * (1 + 1e-12);
                 monotone &= *best.objective >= last;
                 last = *best.objective;
                 ++generations;
                 log << "  gen " << g << ": tau in [" << pher.min_edge() << ", " << pher.max_edge()
                     << "], best obj " << *best.objective << '\n';
             });
    std::fputs(log.str().c_str(), stdout);
    report(10, bounded && monotone && generations == 30,
           fmt("%d generations, tau range [%.4f, %.4f], tau0 %.2f, max obj %.4f, best-so-far %s", generations,
               lowest, highest, cfg.baco.tau0, max_obj, monotone ? "non-decreasing" : "DECREASED"));
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void determinism() {
    const fs::path tmp = fs::temp_directory_path() / "msbaco_acceptance_determinism";
    fs::remove_all(tmp);
    cli::RunOptions opts;
    opts.config = kRoot / "configs/iris.toml";
    opts.seeds = 2;
    std::ostringstream log;
    opts.out_dir = tmp / "a";
    const int first = cli::cmd_run(opts, log);
    opts.out_dir = tmp / "b";
    opts.jobs = 2;
    const int second = cli::cmd_run(opts, log);
    bool same = first == 0 && second == 0;
    for (int seed = 1; seed <= 2 && same; ++seed) {
        const std::string name = "result_" + std::to_string(seed) + ".json";
        const std::string a = slurp(tmp / "a" / name);
        same = !a.empty() && a == slurp(tmp / "b" / name);
    }
    fs::remove_all(tmp);
    report(11, same, fmt("two iris runs (seeds 1-2) %s", same ? "byte-identical" : "differ"));
}

}  // namespace

int main() {
    try {
        const char* names[3] = {"iris", "breast_cancer", "wine"};
        const double min_acc[3] = {96.0, 95.0, 94.0};
        const double max_width[3] = {5.0, 6.0, 10.0};
        const int ids[3] = {1, 2, 3};
        Summary h3[3], base[3];
        for (int d = 0; d < 3; ++d) {
            const ExperimentConfig cfg = dataset_config(names[d]);
            h3[d] = run_seeds(cfg, false);
            report(ids[d], h3[d].accuracy_pct >= min_acc[d] && h3[d].width <= max_width[d],
                   fmt("%s H3 over %d seeds: accuracy %.2f%% (need >= %.1f), width %.2f (need <= %.0f)", names[d],
                       kSeeds, h3[d].accuracy_pct, min_acc[d], h3[d].width, max_width[d]));
        }

        bool compression = true;
        std::string detail;
        for (int d = 0; d < 3; ++d) {
            base[d] = run_seeds(dataset_config(names[d]), true);
            const bool ok = h3[d].width < 25.0 && h3[d].accuracy_pct >= base[d].accuracy_pct - 1.5;
            compression &= ok;
            detail += fmt("%s%s width %.2f acc %.2f%% vs baseline %.2f%%", d ? "; " : "", names[d], h3[d].width,
                          h3[d].accuracy_pct, base[d].accuracy_pct);
        }
        report(4, compression, detail);

        ExperimentConfig h0 = dataset_config("iris");
        h0.design = HeuristicDesign::H0;
        const Summary s0 = run_seeds(h0, false);
        report(5, h3[0].width <= s0.width + 0.5,
               fmt("iris mean width H3 %.2f vs H0 %.2f (+0.5 allowed)", h3[0].width, s0.width));

        const double grad = worst_gradient_error();
        report(6, grad <= 1e-5, fmt("worst relative gradient error %.3g over 100 networks (need <= 1e-5)", grad));

        const double efast = worst_efast_error();
        report(7, efast <= 0.05, fmt("worst additive/Ishigami TE error %.4f (need <= 0.05)", efast));

        const double gap = worst_mask_prune_gap();
        report(8, gap <= 1e-12, fmt("worst mask/prune output gap %.3g over 100 pairs (need <= 1e-12)", gap));

        const int hits = brute_force_hits();
        report(9, hits >= 95, fmt("enumerated optimum reached in %d/100 runs (need >= 95)", hits));

        pheromone_bounds();
        determinism();
    } catch (const std::exception& e) {
        std::printf("acceptance aborted: %s\n", e.what());
        return 2;
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
