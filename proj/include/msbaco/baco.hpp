#pragma once

#include "msbaco/network.hpp"
#include "msbaco/rng.hpp"
#include "msbaco/sensitivity.hpp"
#include "msbaco/types.hpp"

#include <functional>
#include <optional>
#include <string_view>

namespace msbaco {

/// H0 uses no heuristic (and forces beta = 0); H1 correlation, H2 contribution, H3 both.
enum class HeuristicDesign { H0, H1, H2, H3 };

HeuristicDesign parse_design(std::string_view name);
std::string_view to_string(HeuristicDesign design);

/// Values on directed sub-node edges (i, a) -> (j, b), i != j, a, b in {0, 1}.
class EdgeTensor {
public:
    EdgeTensor() = default;
    EdgeTensor(std::size_t nodes, double fill) : nodes_(nodes), data_(nodes * nodes * 4, fill) {}

    std::size_t nodes() const { return nodes_; }

    double& at(std::size_t i, int a, std::size_t j, int b) { return data_[offset(i, a, j, b)]; }
    double at(std::size_t i, int a, std::size_t j, int b) const { return data_[offset(i, a, j, b)]; }

    /// Raw storage, diagonal (i == j) slots included and unused.
    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    /// Extremes over off-diagonal entries.
    double min_edge() const;
    double max_edge() const;

    friend bool operator==(const EdgeTensor&, const EdgeTensor&) = default;

private:
    std::size_t offset(std::size_t i, int a, std::size_t j, int b) const {
        return ((i * 2 + static_cast<std::size_t>(a)) * nodes_ + j) * 2 + static_cast<std::size_t>(b);
    }

    std::size_t nodes_ = 0;
    std::vector<double> data_;
};

using PheromoneMatrix = EdgeTensor;

struct HeuristicMatrix {
    EdgeTensor eta;
    HeuristicDesign design = HeuristicDesign::H3;
};

struct BacoConfig {
    double alpha = 1.0;
    double beta = 0.6;
    double rho = 0.1;
    int ants = 50;
    int generations = 30;
    double tau0 = 0.1;

    void validate() const;
};

struct PathStep {
    std::size_t node;
    std::uint8_t bit;
    friend bool operator==(const PathStep&, const PathStep&) = default;
};

struct BitSolution {
    Mask bits;
    std::vector<PathStep> path;
    /// Empty when no neuron is selected.
    std::optional<double> objective;
    double validation_ce = 0.0;

    bool valid() const { return objective.has_value(); }
    /// Value used in comparisons; invalid solutions count as 0.
    double score() const { return objective.value_or(0.0); }
};

/// Higher objective first, then fewer selected neurons, then the smaller bit string.
bool better(const BitSolution& a, const BitSolution& b);

HeuristicMatrix build_heuristics(HeuristicDesign design, const Vector& contributions, const Matrix& correlation);

/// Eq.-13 style probabilities for leaving sub-node (node, bit): one entry per
/// (j, b) with j unvisited, ordered by j then b. Falls back to uniform when all
/// weights vanish.
struct Candidate {
    std::size_t node;
    std::uint8_t bit;
    double probability;
};
std::vector<Candidate> transition_probabilities(const PheromoneMatrix& pher, const HeuristicMatrix& heur,
                                                const BacoConfig& cfg, std::size_t node, int bit,
                                                const std::vector<bool>& visited);

BitSolution construct_solution(const PheromoneMatrix& pher, const HeuristicMatrix& heur, const BacoConfig& cfg,
                               Rng& rng);

/// Masked cross-entropy over a fixed set of rows, with the hidden layer cached.
class MaskEvaluator {
public:
    MaskEvaluator(const Network& net, const Matrix& x, const Matrix& targets);

    double cross_entropy(const Mask& bits) const;
    /// 1 / max(CE, 1e-9); empty for the all-zero mask.
    std::optional<double> objective(const Mask& bits) const;

private:
    Matrix hidden_;
    Matrix v_;
    Vector b1_;
    Matrix targets_;
};

/// Fills bits' objective and validation CE.
void evaluate_solution(const MaskEvaluator& evaluator, BitSolution& solution);
std::optional<double> evaluate_solution(const Network& net, const Mask& bits, const Matrix& x_val,
                                        const Matrix& t_val);

PheromoneMatrix init_pheromone(std::size_t nodes, double tau0);

/// First-generation reset: every edge set to obj_best / N.
void reset_pheromone(PheromoneMatrix& pher, double obj_best);

/// Evaporate everywhere, deposit rho * obj_best on the best path's edges, clamp below at tau0.
void update_pheromone(PheromoneMatrix& pher, const BitSolution& best, double rho, double tau0);

struct GenerationRecord {
    int generation;
    double best_validation_ce;
    double best_objective;
    std::size_t best_popcount;
};

struct BacoResult {
    BitSolution best;
    std::vector<GenerationRecord> curve;
};

class BacoFailure : public Error {
public:
    using Error::Error;
};

/// Called after each generation's pheromone update.
using GenerationObserver = std::function<void(int generation, const PheromoneMatrix&, const BitSolution& best)>;

/// Ant k of generation t draws from Rng(derive_seed(derive_seed(seed, t), k)).
BacoResult run_baco(const Network& net, const Matrix& x_val, const Matrix& t_val, const AnalysisReport& report,
                    const BacoConfig& cfg, HeuristicDesign design, Seed seed,
                    const GenerationObserver& observer = {});

}  // namespace msbaco
