#pragma once

#include "msbaco/types.hpp"

#include <json.hpp>

namespace msbaco {

/// Single-hidden-layer classifier: sigmoid hidden units, softmax outputs.
///
/// Column-vector form:
///   hidden  = sigmoid(W^T x + b0)    W  : I x N,  b0 : N
///   logits  = V^T hidden + b1        V  : N x K,  b1 : K
/// Batched calls take samples as rows, so hidden = sigmoid(X W + 1 b0^T).
struct Network {
    Matrix w;
    Vector b0;
    Matrix v;
    Vector b1;

    std::size_t inputs() const { return static_cast<std::size_t>(w.rows()); }
    std::size_t hidden() const { return static_cast<std::size_t>(w.cols()); }
    std::size_t outputs() const { return static_cast<std::size_t>(v.cols()); }
    std::size_t parameter_count() const {
        return static_cast<std::size_t>(w.size() + b0.size() + v.size() + b1.size());
    }

    /// Throws DimensionError if the four tensors disagree or hold non-finite values.
    void validate() const;

    friend bool operator==(const Network& a, const Network& b);
};

struct TrainConfig {
    double learning_rate = 0.1;
    int max_epochs = 2000;
    int patience = 20;
    Seed shuffle_seed = 0;
};

/// Every parameter i.i.d. uniform on [-1, 1].
Network init_network(std::size_t inputs, std::size_t hidden, std::size_t outputs, Seed seed);

Matrix hidden_activations(const Network& net, const Matrix& x);

/// Pre-softmax outputs.
Matrix logits(const Network& net, const Matrix& x);

/// Row-wise softmax, shifted by the row max.
Matrix softmax_rows(const Matrix& logits);

Matrix forward(const Network& net, const Matrix& x);

/// Mean cross-entropy over rows; probabilities floored at 1e-12 before the log.
double cross_entropy(const Matrix& probs, const Matrix& targets);

/// Gradient of the single-sample cross-entropy, laid out like Network.
struct Gradient {
    Matrix w;
    Vector b0;
    Matrix v;
    Vector b1;
};
Gradient sample_gradient(const Network& net, const Eigen::Ref<const Vector>& x,
                         const Eigen::Ref<const Vector>& target);

/// One pass of per-sample SGD over a shuffle of the rows seeded by cfg.shuffle_seed.
Network sgd_epoch(Network net, const Matrix& x, const Matrix& targets, const TrainConfig& cfg);

struct TrainResult {
    Network net;
    double validation_ce;
    int epochs_run;
};

/// Epoch i (1-based) shuffles with derive_seed(cfg.shuffle_seed, i). Stops after
/// `patience` epochs without a validation-CE improvement and returns the best snapshot.
TrainResult train_with_early_stopping(const Network& net, const Matrix& x_train, const Matrix& t_train,
                                      const Matrix& x_val, const Matrix& t_val, const TrainConfig& cfg);

/// forward() with deselected hidden activations forced to 0.
Matrix apply_mask(const Network& net, const Mask& bits, const Matrix& x);

/// Drops deselected hidden neurons, keeping the trained values of the rest.
Network prune(const Network& net, const Mask& bits);

/// Lowest index wins ties.
std::vector<int> predict(const Matrix& probs);

double accuracy(const Matrix& probs, const std::vector<int>& labels);
double accuracy(const Network& net, const Matrix& x, const std::vector<int>& labels);

void to_json(nlohmann::json& j, const Network& net);
void from_json(const nlohmann::json& j, Network& net);

}  // namespace msbaco
