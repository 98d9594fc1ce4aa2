#include "msbaco/sensitivity.hpp"

#include "msbaco/correlation.hpp"
#include "msbaco/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace msbaco {

namespace {

constexpr double kVarianceFloor = 1e-12;

}  // namespace

void EfastPlan::validate() const {
    if (factor_count < 1) throw Error("EFAST plan needs at least one factor");
    if (interference < 1) throw Error("EFAST interference factor must be positive");
    if (focal_frequency < 1) throw Error("EFAST focal frequency must be positive");
    if (samples < 1 || samples % 2 == 0) throw Error("EFAST sample count must be odd and positive");
    if (samples < 2 * interference * focal_frequency + 1) {
        throw Error("EFAST sample count violates the Nyquist condition for the focal frequency");
    }
    if (complementary_frequencies.size() != factor_count - 1) {
        throw Error("EFAST plan needs one complementary frequency per non-focal factor");
    }
    for (int w : complementary_frequencies) {
        if (w < 1) throw Error("EFAST complementary frequencies must be positive");
        if (2 * interference * w > focal_frequency) {
            throw Error("EFAST complementary frequency exceeds focal_frequency / (2M)");
        }
    }
}

EfastPlan EfastPlan::defaults(std::size_t factors, Seed phase_seed) {
    return EfastSettings{}.plan(factors, phase_seed);
}

EfastPlan EfastSettings::plan(std::size_t factors, Seed seed) const {
    EfastPlan p;
    p.factor_count = factors;
    p.interference = interference;
    p.samples = samples;
    p.focal_frequency = focal_frequency;
    p.phase_seed = seed;
    const int max_complementary = std::max(1, focal_frequency / (2 * interference));
    const std::size_t others = factors > 0 ? factors - 1 : 0;
    if (others > 1 && others <= static_cast<std::size_t>(max_complementary)) {
        // Few factors: spread over [1, max] so complementary factors do not share
        // low-order harmonics (floor of an evenly spaced grid).
        const double step = static_cast<double>(max_complementary - 1) / static_cast<double>(others - 1);
        for (std::size_t c = 0; c < others; ++c) {
            p.complementary_frequencies.push_back(1 + static_cast<int>(std::floor(step * static_cast<double>(c))));
        }
    } else {
        for (std::size_t c = 0; c < others; ++c) {
            p.complementary_frequencies.push_back(1 + static_cast<int>(c % static_cast<std::size_t>(max_complementary)));
        }
    }
    return p;
}

std::vector<FactorRanges> factor_ranges(const Network& net, const Matrix& x_train) {
    if (x_train.rows() == 0) throw DimensionError("factor_ranges: no training rows");
    const Matrix hidden = hidden_activations(net, x_train);
    const auto N = net.v.rows();
    const auto K = net.v.cols();
    std::vector<FactorRanges> out(static_cast<std::size_t>(K), FactorRanges(static_cast<std::size_t>(N)));
    for (Eigen::Index k = 0; k < K; ++k) {
        for (Eigen::Index n = 0; n < N; ++n) {
            const auto products = (hidden.col(n) * net.v(n, k)).eval();
            out[static_cast<std::size_t>(k)][static_cast<std::size_t>(n)] = {products.minCoeff(),
                                                                               products.maxCoeff()};
        }
    }
    return out;
}

Vector search_points(int samples) {
    Vector s(samples);
    for (int k = 1; k <= samples; ++k) {
        s(k - 1) = std::numbers::pi * static_cast<double>(2 * k - samples - 1) / static_cast<double>(samples);
    }
    return s;
}

Matrix efast_sample(const EfastPlan& plan, const FactorRanges& ranges, std::size_t focal) {
    plan.validate();
    if (ranges.size() != plan.factor_count) throw DimensionError("efast_sample: range count != factor count");
    if (focal >= plan.factor_count) throw DimensionError("efast_sample: focal factor out of range");
    for (const auto& r : ranges)
        if (!(r.low <= r.high)) throw Error("efast_sample: factor range has low > high");

    Rng rng(plan.phase_seed);
    const Vector s = search_points(plan.samples);
    const auto N = static_cast<Eigen::Index>(plan.factor_count);
    Matrix out(plan.samples, N);
    std::size_t next_complementary = 0;
    for (Eigen::Index j = 0; j < N; ++j) {
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const int omega = static_cast<std::size_t>(j) == focal
                              ? plan.focal_frequency
                              : plan.complementary_frequencies[next_complementary++];
        const Range& r = ranges[static_cast<std::size_t>(j)];
        for (Eigen::Index i = 0; i < plan.samples; ++i) {
            const double u = 0.5 + std::asin(std::sin(omega * s(i) + phase)) / std::numbers::pi;
            out(i, j) = r.low + r.width() * std::clamp(u, 0.0, 1.0);
        }
    }
    return out;
}

double total_effect_from_outputs(std::span<const double> y, const EfastPlan& plan) {
    if (y.size() != static_cast<std::size_t>(plan.samples)) {
        throw DimensionError("total_effect: output count differs from the plan's sample count");
    }
    for (double v : y)
        if (!std::isfinite(v)) throw Error("total_effect: model produced a non-finite output");

    // p * s_i = pi * p * (2i - N_s - 1) / N_s, so every angle is a multiple of pi / N_s.
    const int ns = plan.samples;
    const int period = 2 * ns;
    std::vector<double> cos_table(static_cast<std::size_t>(period));
    std::vector<double> sin_table(static_cast<std::size_t>(period));
    for (int m = 0; m < period; ++m) {
        const double angle = std::numbers::pi * static_cast<double>(m) / static_cast<double>(ns);
        cos_table[static_cast<std::size_t>(m)] = std::cos(angle);
        sin_table[static_cast<std::size_t>(m)] = std::sin(angle);
    }

    const double inv = 1.0 / static_cast<double>(ns);
    const int harmonics = (ns - 1) / 2;
    const int complementary_band = plan.focal_frequency / 2;
    double total = 0.0;
    double complementary = 0.0;
    for (int p = 1; p <= harmonics; ++p) {
        double a = 0.0;
        double b = 0.0;
        for (int i = 1; i <= ns; ++i) {
            int m = (p * (2 * i - ns - 1)) % period;
            if (m < 0) m += period;
            const auto idx = static_cast<std::size_t>(m);
            a += y[static_cast<std::size_t>(i - 1)] * cos_table[idx];
            b += y[static_cast<std::size_t>(i - 1)] * sin_table[idx];
        }
        const double power = (a * inv) * (a * inv) + (b * inv) * (b * inv);
        total += power;
        if (p <= complementary_band) complementary += power;
    }
    total *= 2.0;
    complementary *= 2.0;
    if (total < kVarianceFloor) return 0.0;
    return std::clamp(1.0 - complementary / total, 0.0, 1.0);
}

double total_effect(const ScalarModel& model, const EfastPlan& plan, const FactorRanges& ranges,
                    std::size_t focal) {
    const Matrix samples = efast_sample(plan, ranges, focal);
    std::vector<double> y(static_cast<std::size_t>(samples.rows()));
    std::vector<double> point(static_cast<std::size_t>(samples.cols()));
    for (Eigen::Index i = 0; i < samples.rows(); ++i) {
        for (Eigen::Index j = 0; j < samples.cols(); ++j) point[static_cast<std::size_t>(j)] = samples(i, j);
        y[static_cast<std::size_t>(i)] = model(point);
    }
    return total_effect_from_outputs(y, plan);
}

AnalysisReport contribution_percentages(const Network& net, const Matrix& x_train, const EfastSettings& settings) {
    const auto ranges = factor_ranges(net, x_train);
    const std::size_t N = net.hidden();
    const std::size_t K = net.outputs();

    AnalysisReport report;
    report.total_effects = Matrix::Zero(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(K));
    std::vector<double> y(static_cast<std::size_t>(settings.samples));
    for (std::size_t k = 0; k < K; ++k) {
        const Seed output_seed = derive_seed(settings.phase_seed, k);
        const double bias = net.b1(static_cast<Eigen::Index>(k));
        for (std::size_t n = 0; n < N; ++n) {
            const EfastPlan plan = settings.plan(N, derive_seed(output_seed, n));
            const Matrix samples = efast_sample(plan, ranges[k], n);
            // Logit model: the factors enter additively.
            for (Eigen::Index i = 0; i < samples.rows(); ++i) {
                y[static_cast<std::size_t>(i)] = samples.row(i).sum() + bias;
            }
            report.total_effects(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)) =
                total_effect_from_outputs(y, plan);
        }
    }

    report.row_sums = report.total_effects.rowwise().sum();
    const double total = report.row_sums.sum();
    if (total < kVarianceFloor) {
        report.contributions = Vector::Constant(static_cast<Eigen::Index>(N), 1.0 / static_cast<double>(N));
    } else {
        report.contributions = report.row_sums / total;
    }
    return report;
}

AnalysisReport analyze(const Network& net, const Matrix& x_train, const EfastSettings& settings) {
    AnalysisReport report = contribution_percentages(net, x_train, settings);
    report.correlation = correlation_matrix(hidden_activations(net, x_train));
    return report;
}

void to_json(nlohmann::json& j, const AnalysisReport& report) {
    auto rows = [](const Matrix& m) {
        auto out = nlohmann::json::array();
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            auto row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
            out.push_back(std::move(row));
        }
        return out;
    };
    auto values = [](const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    j = nlohmann::json{{"TE", rows(report.total_effects)},
                       {"S", values(report.row_sums)},
                       {"C", values(report.contributions)},
                       {"R", rows(report.correlation)}};
}

}  // namespace msbaco
