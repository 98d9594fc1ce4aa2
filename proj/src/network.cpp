#include "msbaco/network.hpp"

#include "msbaco/rng.hpp"

#include <json.hpp>

#include <cmath>
#include <numeric>

namespace msbaco {

namespace {

constexpr double kProbFloor = 1e-12;

void check_input(const Network& net, const Matrix& x) {
    if (static_cast<std::size_t>(x.cols()) != net.inputs()) {
        throw DimensionError("input has " + std::to_string(x.cols()) + " columns, network expects " +
                             std::to_string(net.inputs()));
    }
}

void check_mask(const Network& net, const Mask& bits) {
    if (bits.size() != net.hidden()) {
        throw DimensionError("mask length " + std::to_string(bits.size()) + " does not match hidden width " +
                             std::to_string(net.hidden()));
    }
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

void Network::validate() const {
    if (w.cols() != b0.size() || v.rows() != w.cols() || v.cols() != b1.size()) {
        throw DimensionError("network tensors have inconsistent shapes");
    }
    if (w.rows() < 1 || w.cols() < 1 || v.cols() < 1) throw DimensionError("network has an empty dimension");
    if (!w.allFinite() || !b0.allFinite() || !v.allFinite() || !b1.allFinite()) {
        throw DimensionError("network holds non-finite parameters");
    }
}

bool operator==(const Network& a, const Network& b) {
    auto same = [](const auto& x, const auto& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && (x.array() == y.array()).all();
    };
    return same(a.w, b.w) && same(a.b0, b.b0) && same(a.v, b.v) && same(a.b1, b.b1);
}

Network init_network(std::size_t inputs, std::size_t hidden, std::size_t outputs, Seed seed) {
    if (inputs < 1 || hidden < 1 || outputs < 1) {
        throw DimensionError("network dimensions must all be at least 1");
    }
    const auto I = static_cast<Eigen::Index>(inputs);
    const auto N = static_cast<Eigen::Index>(hidden);
    const auto K = static_cast<Eigen::Index>(outputs);
    Rng rng(seed);
    auto draw = [&rng](auto& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1.0, 1.0);
    };
    Network net{Matrix(I, N), Vector(N), Matrix(N, K), Vector(K)};
    draw(net.w);
    draw(net.b0);
    draw(net.v);
    draw(net.b1);
    return net;
}

Matrix hidden_activations(const Network& net, const Matrix& x) {
    check_input(net, x);
    Matrix z = x * net.w;
    z.rowwise() += net.b0.transpose();
    return z.unaryExpr([](double t) { return sigmoid(t); });
}

Matrix logits(const Network& net, const Matrix& x) {
    Matrix out = hidden_activations(net, x) * net.v;
    out.rowwise() += net.b1.transpose();
    return out;
}

Matrix softmax_rows(const Matrix& logits) {
    Matrix p(logits.rows(), logits.cols());
    for (Eigen::Index r = 0; r < logits.rows(); ++r) {
        const double top = logits.row(r).maxCoeff();
        double total = 0.0;
        for (Eigen::Index c = 0; c < logits.cols(); ++c) {
            p(r, c) = std::exp(logits(r, c) - top);
            total += p(r, c);
        }
        p.row(r) /= total;
    }
    return p;
}

Matrix forward(const Network& net, const Matrix& x) { return softmax_rows(logits(net, x)); }

double cross_entropy(const Matrix& probs, const Matrix& targets) {
    if (probs.rows() == 0) throw DimensionError("cross_entropy: empty input");
    if (probs.rows() != targets.rows() || probs.cols() != targets.cols()) {
        throw DimensionError("cross_entropy: probability and target shapes differ");
    }
    double total = 0.0;
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        for (Eigen::Index c = 0; c < probs.cols(); ++c) {
            if (targets(r, c) != 0.0) total -= targets(r, c) * std::log(std::max(probs(r, c), kProbFloor));
        }
    }
    return total / static_cast<double>(probs.rows());
}

Gradient sample_gradient(const Network& net, const Eigen::Ref<const Vector>& x,
                         const Eigen::Ref<const Vector>& target) {
    const Vector hidden = (net.w.transpose() * x + net.b0).unaryExpr([](double t) { return sigmoid(t); });
    Vector z = net.v.transpose() * hidden + net.b1;
    z.array() -= z.maxCoeff();
    Vector p = z.array().exp();
    p /= p.sum();

    // Softmax + cross-entropy: dCE/dlogit = p - d (targets sum to one).
    const Vector delta_out = p - target;
    const Vector delta_hidden = ((net.v * delta_out).array() * hidden.array() * (1.0 - hidden.array())).matrix();
    return {x * delta_hidden.transpose(), delta_hidden, hidden * delta_out.transpose(), delta_out};
}

Network sgd_epoch(Network net, const Matrix& x, const Matrix& targets, const TrainConfig& cfg) {
    check_input(net, x);
    if (x.rows() != targets.rows() || static_cast<std::size_t>(targets.cols()) != net.outputs()) {
        throw DimensionError("sgd_epoch: target shape does not match inputs/network");
    }
    if (!(cfg.learning_rate >= 0.0)) throw DimensionError("sgd_epoch: learning rate must be non-negative");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(x.rows()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    Rng rng(cfg.shuffle_seed);
    rng.shuffle(std::span(order));

    const double lr = cfg.learning_rate;
    if (lr == 0.0) return net;
    for (auto r : order) {
        const Gradient g = sample_gradient(net, x.row(r).transpose(), targets.row(r).transpose());
        net.w -= lr * g.w;
        net.b0 -= lr * g.b0;
        net.v -= lr * g.v;
        net.b1 -= lr * g.b1;
    }
    return net;
}

TrainResult train_with_early_stopping(const Network& net, const Matrix& x_train, const Matrix& t_train,
                                      const Matrix& x_val, const Matrix& t_val, const TrainConfig& cfg) {
    if (x_train.rows() == 0 || x_val.rows() == 0) {
        throw DimensionError("early stopping needs non-empty train and validation partitions");
    }
    if (cfg.patience < 1) throw DimensionError("patience must be at least 1");

    TrainResult best{net, cross_entropy(forward(net, x_val), t_val), 0};
    Network current = net;
    int stalled = 0;
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        TrainConfig epoch_cfg = cfg;
        epoch_cfg.shuffle_seed = derive_seed(cfg.shuffle_seed, static_cast<std::uint64_t>(epoch));
        current = sgd_epoch(std::move(current), x_train, t_train, epoch_cfg);
        best.epochs_run = epoch;
        const double ce = cross_entropy(forward(current, x_val), t_val);
        if (ce < best.validation_ce) {
            best.net = current;
            best.validation_ce = ce;
            stalled = 0;
        } else if (++stalled >= cfg.patience) {
            break;
        }
    }
    return best;
}

Matrix apply_mask(const Network& net, const Mask& bits, const Matrix& x) {
    check_mask(net, bits);
    Matrix hidden = hidden_activations(net, x);
    for (std::size_t n = 0; n < bits.size(); ++n) {
        if (!bits[n]) hidden.col(static_cast<Eigen::Index>(n)).setZero();
    }
    Matrix z = hidden * net.v;
    z.rowwise() += net.b1.transpose();
    return softmax_rows(z);
}

Network prune(const Network& net, const Mask& bits) {
    check_mask(net, bits);
    const auto keep = static_cast<Eigen::Index>(popcount(bits));
    if (keep == 0) throw DimensionError("prune: mask selects no neurons");

    Network out{Matrix(net.w.rows(), keep), Vector(keep), Matrix(keep, net.v.cols()), net.b1};
    Eigen::Index k = 0;
    for (std::size_t n = 0; n < bits.size(); ++n) {
        if (!bits[n]) continue;
        const auto src = static_cast<Eigen::Index>(n);
        out.w.col(k) = net.w.col(src);
        out.b0(k) = net.b0(src);
        out.v.row(k) = net.v.row(src);
        ++k;
    }
    return out;
}

std::vector<int> predict(const Matrix& probs) {
    std::vector<int> out(static_cast<std::size_t>(probs.rows()));
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        Eigen::Index arg = 0;
        for (Eigen::Index c = 1; c < probs.cols(); ++c)
            if (probs(r, c) > probs(r, arg)) arg = c;
        out[static_cast<std::size_t>(r)] = static_cast<int>(arg);
    }
    return out;
}

double accuracy(const Matrix& probs, const std::vector<int>& labels) {
    if (probs.rows() == 0) throw DimensionError("accuracy: empty input");
    if (static_cast<std::size_t>(probs.rows()) != labels.size()) {
        throw DimensionError("accuracy: row count and label count differ");
    }
    const auto pred = predict(probs);
    std::size_t hits = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) hits += pred[i] == labels[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(labels.size());
}

double accuracy(const Network& net, const Matrix& x, const std::vector<int>& labels) {
    return accuracy(forward(net, x), labels);
}

namespace {

nlohmann::json rows_of(const Matrix& m) {
    auto out = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        out.push_back(std::move(row));
    }
    return out;
}

nlohmann::json values_of(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Matrix matrix_from(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows) {
        throw DimensionError(std::string("network JSON: ") + name + " has the wrong row count");
    }
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw DimensionError(std::string("network JSON: ") + name + " has the wrong column count");
        }
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

Vector vector_from(const nlohmann::json& j, Eigen::Index size, const char* name) {
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size) {
        throw DimensionError(std::string("network JSON: ") + name + " has the wrong length");
    }
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
    return v;
}

}  // namespace

void to_json(nlohmann::json& j, const Network& net) {
    j = nlohmann::json{{"I", net.inputs()}, {"N", net.hidden()}, {"K", net.outputs()},
                       {"W", rows_of(net.w)}, {"B0", values_of(net.b0)},
                       {"V", rows_of(net.v)}, {"B1", values_of(net.b1)}};
}

void from_json(const nlohmann::json& j, Network& net) {
    const auto I = j.at("I").get<Eigen::Index>();
    const auto N = j.at("N").get<Eigen::Index>();
    const auto K = j.at("K").get<Eigen::Index>();
    if (I < 1 || N < 1 || K < 1) throw DimensionError("network JSON: dimensions must be positive");
    net.w = matrix_from(j.at("W"), I, N, "W");
    net.b0 = vector_from(j.at("B0"), N, "B0");
    net.v = matrix_from(j.at("V"), N, K, "V");
    net.b1 = vector_from(j.at("B1"), K, "B1");
    net.validate();
}

}  // namespace msbaco
