#pragma once

#include "msbaco/network.hpp"
#include "msbaco/types.hpp"

#include <json.hpp>

#include <functional>
#include <span>

namespace msbaco {

/// Sampling design of one extended-FAST search curve.
///
/// The focal factor oscillates at `focal_frequency`; every other factor takes the
/// next entry of `complementary_frequencies` in index order. Spectral power at
/// harmonics 1..focal_frequency/2 is attributed to the complementary set.
struct EfastPlan {
    std::size_t factor_count = 0;
    int interference = 4;
    int samples = 513;
    int focal_frequency = 64;
    std::vector<int> complementary_frequencies;
    Seed phase_seed = 0;

    /// Throws Error on violation of the Nyquist or interference constraints.
    void validate() const;

    /// M = 4, N_s = 513, focal 64. Complementary frequencies are spread evenly over
    /// 1..8 when there are at most 8 of them and cycle through 1..8 otherwise.
    static EfastPlan defaults(std::size_t factors, Seed phase_seed);
};

/// Tunables for contribution_percentages; frequencies follow EfastPlan::defaults.
struct EfastSettings {
    int interference = 4;
    int samples = 513;
    int focal_frequency = 64;
    Seed phase_seed = 0;

    EfastPlan plan(std::size_t factors, Seed phase_seed) const;
};

struct Range {
    double low = 0.0;
    double high = 0.0;
    double width() const { return high - low; }
};
using FactorRanges = std::vector<Range>;

/// Ranges of v_nk * y_n over the given rows, one FactorRanges per output k.
std::vector<FactorRanges> factor_ranges(const Network& net, const Matrix& x_train);

/// The N_s points s_k = pi (2k - N_s - 1) / N_s, k = 1..N_s, spanning (-pi, pi).
Vector search_points(int samples);

/// N_s x N matrix of factor values along the focal factor's search curve.
Matrix efast_sample(const EfastPlan& plan, const FactorRanges& ranges, std::size_t focal);

/// Total effect from model outputs evaluated along the focal curve.
double total_effect_from_outputs(std::span<const double> outputs, const EfastPlan& plan);

using ScalarModel = std::function<double(std::span<const double>)>;

/// Total-effect index of `focal`, clamped to [0, 1]; 0 when the output variance is below 1e-12.
double total_effect(const ScalarModel& model, const EfastPlan& plan, const FactorRanges& ranges,
                    std::size_t focal);

struct AnalysisReport {
    Matrix total_effects;  // N x K
    Vector row_sums;       // S_n = sum_k TE_nk
    Vector contributions;  // C_n = S_n / sum S
    Matrix correlation;    // N x N, empty until filled
};

/// TE for each (neuron, output) model where the model for output k is its logit,
/// sum_n v_nk y_n + b_k, with one factor per hidden neuron. The curve for (n, k)
/// uses phase seed derive_seed(derive_seed(settings.phase_seed, k), n).
AnalysisReport contribution_percentages(const Network& net, const Matrix& x_train,
                                        const EfastSettings& settings = {});

/// contribution_percentages plus the correlation of training-row hidden activations.
AnalysisReport analyze(const Network& net, const Matrix& x_train, const EfastSettings& settings = {});

void to_json(nlohmann::json& j, const AnalysisReport& report);

}  // namespace msbaco
