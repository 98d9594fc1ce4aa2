#include "msbaco/baco.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace msbaco {

namespace {

constexpr double kCeFloor = 1e-9;

}  // namespace

HeuristicDesign parse_design(std::string_view name) {
    if (name == "H0" || name == "h0") return HeuristicDesign::H0;
    if (name == "H1" || name == "h1") return HeuristicDesign::H1;
    if (name == "H2" || name == "h2") return HeuristicDesign::H2;
    if (name == "H3" || name == "h3") return HeuristicDesign::H3;
    throw ConfigError("unknown heuristic design '" + std::string(name) + "' (expected H0, H1, H2 or H3)");
}

std::string_view to_string(HeuristicDesign design) {
    switch (design) {
        case HeuristicDesign::H0: return "H0";
        case HeuristicDesign::H1: return "H1";
        case HeuristicDesign::H2: return "H2";
        case HeuristicDesign::H3: return "H3";
    }
    return "?";
}

double EdgeTensor::min_edge() const {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes_; ++i)
        for (int a = 0; a < 2; ++a)
            for (std::size_t j = 0; j < nodes_; ++j)
                if (j != i)
                    for (int b = 0; b < 2; ++b) m = std::min(m, at(i, a, j, b));
    return m;
}

double EdgeTensor::max_edge() const {
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < nodes_; ++i)
        for (int a = 0; a < 2; ++a)
            for (std::size_t j = 0; j < nodes_; ++j)
                if (j != i)
                    for (int b = 0; b < 2; ++b) m = std::max(m, at(i, a, j, b));
    return m;
}

void BacoConfig::validate() const {
    if (!(rho > 0.0 && rho <= 1.0)) throw ConfigError("evaporation rate rho must lie in (0, 1]");
    if (ants < 1) throw ConfigError("ant count must be at least 1");
    if (generations < 1) throw ConfigError("generation count must be at least 1");
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("alpha and beta must be non-negative");
    if (!(tau0 > 0.0)) throw ConfigError("tau0 must be positive");
}

bool better(const BitSolution& a, const BitSolution& b) {
    if (a.score() != b.score()) return a.score() > b.score();
    const auto pa = popcount(a.bits);
    const auto pb = popcount(b.bits);
    if (pa != pb) return pa < pb;
    return a.bits < b.bits;
}

HeuristicMatrix build_heuristics(HeuristicDesign design, const Vector& contributions, const Matrix& correlation) {
    const auto n = static_cast<std::size_t>(contributions.size());
    if (correlation.rows() != contributions.size() || correlation.cols() != contributions.size()) {
        throw DimensionError("heuristics: correlation matrix does not match the contribution vector");
    }
    HeuristicMatrix h{EdgeTensor(n, 0.0), design};
    const double mean_contribution = n > 0 ? contributions.sum() / static_cast<double>(n) : 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double r = std::abs(correlation(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            const double c = contributions(static_cast<Eigen::Index>(j));
            double deselect = 1.0;
            double select = 1.0;
            switch (design) {
                case HeuristicDesign::H0: break;
                case HeuristicDesign::H1:
                    deselect = r;
                    select = 1.0 - r;
                    break;
                case HeuristicDesign::H2:
                    deselect = mean_contribution;
                    select = c;
                    break;
                case HeuristicDesign::H3:
                    deselect = r * mean_contribution;
                    select = (1.0 - r) * c;
                    break;
            }
            for (int a = 0; a < 2; ++a) {
                h.eta.at(i, a, j, 0) = deselect;
                h.eta.at(i, a, j, 1) = select;
            }
        }
    }
    return h;
}

std::vector<Candidate> transition_probabilities(const PheromoneMatrix& pher, const HeuristicMatrix& heur,
                                                const BacoConfig& cfg, std::size_t node, int bit,
                                                const std::vector<bool>& visited) {
    std::vector<Candidate> out;
    double total = 0.0;
    for (std::size_t j = 0; j < visited.size(); ++j) {
        if (visited[j]) continue;
        for (int b = 0; b < 2; ++b) {
            const double w = std::pow(pher.at(node, bit, j, b), cfg.alpha) *
                             std::pow(heur.eta.at(node, bit, j, b), cfg.beta);
            out.push_back({j, static_cast<std::uint8_t>(b), w});
            total += w;
        }
    }
    if (out.empty()) return out;
    if (!(total > 0.0) || !std::isfinite(total)) {
        // Degenerate weights: choose uniformly so the ant can finish its tour.
        const double p = 1.0 / static_cast<double>(out.size());
        for (auto& c : out) c.probability = p;
        return out;
    }
    for (auto& c : out) c.probability /= total;
    return out;
}

BitSolution construct_solution(const PheromoneMatrix& pher, const HeuristicMatrix& heur, const BacoConfig& cfg,
                               Rng& rng) {
    const std::size_t n = pher.nodes();
    if (n == 0 || heur.eta.nodes() != n) throw DimensionError("construct_solution: inconsistent graph sizes");

    BitSolution sol;
    sol.bits.assign(n, 0);
    sol.path.reserve(n);
    std::vector<bool> visited(n, false);

    std::size_t node = rng.index(n);
    int bit = static_cast<int>(rng.index(2));
    for (;;) {
        visited[node] = true;
        sol.bits[node] = static_cast<std::uint8_t>(bit);
        sol.path.push_back({node, static_cast<std::uint8_t>(bit)});
        if (sol.path.size() == n) break;

        const auto candidates = transition_probabilities(pher, heur, cfg, node, bit, visited);
        const double r = rng.uniform();
        double cumulative = 0.0;
        const Candidate* chosen = &candidates.back();
        for (const auto& c : candidates) {
            cumulative += c.probability;
            if (r < cumulative) {
                chosen = &c;
                break;
            }
        }
        node = chosen->node;
        bit = chosen->bit;
    }
    return sol;
}

MaskEvaluator::MaskEvaluator(const Network& net, const Matrix& x, const Matrix& targets)
    : hidden_(hidden_activations(net, x)), v_(net.v), b1_(net.b1), targets_(targets) {
    if (targets.rows() != x.rows() || static_cast<std::size_t>(targets.cols()) != net.outputs()) {
        throw DimensionError("MaskEvaluator: target shape does not match inputs/network");
    }
}

double MaskEvaluator::cross_entropy(const Mask& bits) const {
    if (static_cast<Eigen::Index>(bits.size()) != v_.rows()) {
        throw DimensionError("mask length does not match hidden width");
    }
    Matrix z(hidden_.rows(), v_.cols());
    z.rowwise() = b1_.transpose();
    for (std::size_t n = 0; n < bits.size(); ++n) {
        if (!bits[n]) continue;
        const auto col = static_cast<Eigen::Index>(n);
        z.noalias() += hidden_.col(col) * v_.row(col);
    }
    return msbaco::cross_entropy(softmax_rows(z), targets_);
}

std::optional<double> MaskEvaluator::objective(const Mask& bits) const {
    if (popcount(bits) == 0) {
        if (static_cast<Eigen::Index>(bits.size()) != v_.rows()) {
            throw DimensionError("mask length does not match hidden width");
        }
        return std::nullopt;
    }
    return 1.0 / std::max(cross_entropy(bits), kCeFloor);
}

void evaluate_solution(const MaskEvaluator& evaluator, BitSolution& solution) {
    if (popcount(solution.bits) == 0) {
        solution.objective.reset();
        solution.validation_ce = std::numeric_limits<double>::infinity();
        return;
    }
    solution.validation_ce = evaluator.cross_entropy(solution.bits);
    solution.objective = 1.0 / std::max(solution.validation_ce, kCeFloor);
}

std::optional<double> evaluate_solution(const Network& net, const Mask& bits, const Matrix& x_val,
                                        const Matrix& t_val) {
    return MaskEvaluator(net, x_val, t_val).objective(bits);
}

PheromoneMatrix init_pheromone(std::size_t nodes, double tau0) {
    if (nodes < 1) throw DimensionError("pheromone matrix needs at least one node");
    return PheromoneMatrix(nodes, tau0);
}

void reset_pheromone(PheromoneMatrix& pher, double obj_best) {
    const double value = obj_best / static_cast<double>(pher.nodes());
    std::fill(pher.values().begin(), pher.values().end(), value);
}

void update_pheromone(PheromoneMatrix& pher, const BitSolution& best, double rho, double tau0) {
    if (!best.valid()) throw BacoFailure("pheromone update needs a valid best solution");
    if (best.path.size() != pher.nodes()) throw DimensionError("best path does not span the graph");
    const double obj = *best.objective;
    for (double& t : pher.values()) t *= 1.0 - rho;
    for (std::size_t s = 1; s < best.path.size(); ++s) {
        const auto& from = best.path[s - 1];
        const auto& to = best.path[s];
        pher.at(from.node, from.bit, to.node, to.bit) += rho * obj;
    }
    for (double& t : pher.values()) t = std::max(t, tau0);
}

BacoResult run_baco(const Network& net, const Matrix& x_val, const Matrix& t_val, const AnalysisReport& report,
                    const BacoConfig& cfg, HeuristicDesign design, Seed seed, const GenerationObserver& observer) {
    cfg.validate();
    const std::size_t n = net.hidden();
    if (report.correlation.rows() != static_cast<Eigen::Index>(n)) {
        throw DimensionError("run_baco: analysis report does not match the network width");
    }
    BacoConfig effective = cfg;
    if (design == HeuristicDesign::H0) effective.beta = 0.0;

    const HeuristicMatrix heur = build_heuristics(design, report.contributions, report.correlation);
    const MaskEvaluator evaluator(net, x_val, t_val);
    PheromoneMatrix pher = init_pheromone(n, cfg.tau0);

    BacoResult result;
    std::optional<BitSolution> best;
    bool reset_done = false;
    for (int gen = 1; gen <= cfg.generations; ++gen) {
        const Seed gen_seed = derive_seed(seed, static_cast<std::uint64_t>(gen));
        for (int ant = 0; ant < cfg.ants; ++ant) {
            Rng rng(derive_seed(gen_seed, static_cast<std::uint64_t>(ant)));
            BitSolution sol = construct_solution(pher, heur, effective, rng);
            evaluate_solution(evaluator, sol);
            if (sol.valid() && (!best || better(sol, *best))) best = std::move(sol);
        }
        if (best) {
            if (!reset_done) {
                reset_pheromone(pher, *best->objective);
                reset_done = true;
            }
            update_pheromone(pher, *best, cfg.rho, cfg.tau0);
            result.curve.push_back({gen, best->validation_ce, *best->objective, popcount(best->bits)});
        } else {
            result.curve.push_back({gen, std::numeric_limits<double>::infinity(), 0.0, 0});
        }
        if (observer && best) observer(gen, pher, *best);
    }
    if (!best) throw BacoFailure("every ant produced an empty neuron subset in every generation");
    result.best = std::move(*best);
    return result;
}

}  // namespace msbaco
