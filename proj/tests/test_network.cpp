#include <doctest.h>

#include "msbaco/network.hpp"
#include "msbaco/rng.hpp"

#include <json.hpp>

#include <cmath>

using namespace msbaco;

namespace {

Matrix random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double scale = 1.0) {
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-scale, scale);
    return m;
}

Matrix one_hot(const std::vector<int>& labels, Eigen::Index k) {
    Matrix t = Matrix::Zero(static_cast<Eigen::Index>(labels.size()), k);
    for (std::size_t i = 0; i < labels.size(); ++i) t(static_cast<Eigen::Index>(i), labels[i]) = 1.0;
    return t;
}

Network zero_network(Eigen::Index i, Eigen::Index n, Eigen::Index k) {
    return {Matrix::Zero(i, n), Vector::Zero(n), Matrix::Zero(n, k), Vector::Zero(k)};
}

double sample_loss(const Network& net, const Vector& x, const Vector& d) {
    return cross_entropy(forward(net, x.transpose()), d.transpose());
}

}  // namespace

TEST_CASE("init_network draws every parameter in [-1, 1] deterministically") {
    const Network a = init_network(4, 50, 3, 7);
    CHECK(a.parameter_count() == 403);
    for (const auto* m : {&a.w, &a.v}) {
        CHECK(m->minCoeff() >= -1.0);
        CHECK(m->maxCoeff() <= 1.0);
    }
    CHECK(a.b0.cwiseAbs().maxCoeff() <= 1.0);
    CHECK(a.b1.cwiseAbs().maxCoeff() <= 1.0);
    CHECK(a == init_network(4, 50, 3, 7));
    CHECK_FALSE(a == init_network(4, 50, 3, 8));
    CHECK_THROWS_AS(init_network(0, 5, 3, 1), DimensionError);
    CHECK_THROWS_AS(init_network(4, 0, 3, 1), DimensionError);
}

TEST_CASE("hidden activations") {
    SUBCASE("zero parameters give 0.5 everywhere") {
        const Network net = zero_network(3, 4, 2);
        Rng rng(1);
        const Matrix h = hidden_activations(net, random_matrix(rng, 5, 3, 10.0));
        CHECK((h.array() == 0.5).all());
    }
    SUBCASE("hand-evaluated 2x2 layer") {
        Network net = zero_network(2, 2, 2);
        net.w << 0.5, -1.0, 2.0, 0.25;
        net.b0 << 0.1, -0.2;
        Matrix x(3, 2);
        x << 1.0, 2.0, -0.5, 0.0, 0.0, -3.0;
        // sigmoid(x W + b0), evaluated independently.
        Matrix expected(3, 2);
        expected << 0.9900481981330957, 0.3318122278318339, 0.46257015465625045, 0.574442516811659,
            0.002731960763011059, 0.27888482197713693;
        const Matrix h = hidden_activations(net, x);
        CHECK((h - expected).cwiseAbs().maxCoeff() < 1e-15);
    }
    SUBCASE("pre-activation zero gives 0.5") {
        Network net = zero_network(1, 1, 2);
        net.w(0, 0) = 2.0;
        net.b0(0) = -1.0;
        Matrix x(1, 1);
        x << 0.5;
        CHECK(hidden_activations(net, x)(0, 0) == 0.5);
    }
    CHECK_THROWS_AS(hidden_activations(zero_network(3, 2, 2), Matrix::Zero(2, 4)), DimensionError);
}

TEST_CASE("forward produces normalized, shift-invariant probabilities") {
    SUBCASE("all-zero parameters are uniform") {
        const Matrix p = forward(zero_network(2, 3, 4), Matrix::Ones(3, 2));
        CHECK((p.array() - 0.25).abs().maxCoeff() < 1e-15);
    }
    SUBCASE("equal logits with K = 2") {
        Matrix z(1, 2);
        z << 3.5, 3.5;
        const Matrix p = softmax_rows(z);
        CHECK(p(0, 0) == 0.5);
        CHECK(p(0, 1) == 0.5);
    }
    SUBCASE("rows sum to one for large logits and shifts do not matter") {
        Rng rng(11);
        for (int trial = 0; trial < 50; ++trial) {
            const Matrix z = random_matrix(rng, 6, 5, 500.0);
            const Matrix p = softmax_rows(z);
            CHECK((p.rowwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
            CHECK(p.minCoeff() >= 0.0);
            const Matrix shifted = softmax_rows(z.array() + rng.uniform(-100.0, 100.0));
            CHECK((shifted - p).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}

TEST_CASE("cross entropy") {
    Matrix exact(2, 3);
    exact << 1, 0, 0, 0, 0, 1;
    CHECK(cross_entropy(exact, exact) == 0.0);

    const Matrix uniform = Matrix::Constant(4, 3, 1.0 / 3.0);
    CHECK(cross_entropy(uniform, one_hot({0, 1, 2, 1}, 3)) == doctest::Approx(std::log(3.0)).epsilon(1e-14));

    Matrix probs(2, 2);
    probs << 0.8, 0.2, 0.4, 0.6;
    // -(ln 0.8 + ln 0.6) / 2
    CHECK(cross_entropy(probs, one_hot({0, 1}, 2)) == doctest::Approx(0.3669845875401002).epsilon(1e-14));

    Matrix zero_prob(1, 2);
    zero_prob << 1.0, 0.0;
    CHECK(cross_entropy(zero_prob, one_hot({1}, 2)) == doctest::Approx(-std::log(1e-12)));
    CHECK_THROWS_AS(cross_entropy(Matrix(0, 2), Matrix(0, 2)), DimensionError);
}

TEST_CASE("analytic gradients match central finite differences") {
    Rng rng(2024);
    constexpr double h = 1e-5;
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const auto I = static_cast<std::size_t>(1 + rng.index(4));
        const auto N = static_cast<std::size_t>(1 + rng.index(4));
        const auto K = static_cast<std::size_t>(2 + rng.index(3));
        const Network net = init_network(I, N, K, rng.next());
        Vector x(static_cast<Eigen::Index>(I));
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        Vector d = Vector::Zero(static_cast<Eigen::Index>(K));
        d(static_cast<Eigen::Index>(rng.index(K))) = 1.0;

        const Gradient g = sample_gradient(net, x, d);
        auto check = [&](auto member, const auto& analytic) {
            for (Eigen::Index i = 0; i < analytic.size(); ++i) {
                Network plus = net;
                Network minus = net;
                (plus.*member).data()[i] += h;
                (minus.*member).data()[i] -= h;
                const double numeric = (sample_loss(plus, x, d) - sample_loss(minus, x, d)) / (2 * h);
                const double a = analytic.data()[i];
                const double scale = std::max(std::abs(a), std::abs(numeric));
                const double err = scale < 1e-6 ? std::abs(a - numeric) : std::abs(a - numeric) / scale;
                worst = std::max(worst, err);
            }
        };
        check(&Network::w, g.w);
        check(&Network::b0, g.b0);
        check(&Network::v, g.v);
        check(&Network::b1, g.b1);
    }
    CHECK(worst <= 1e-5);
}

TEST_CASE("sgd_epoch") {
    // Two separable clusters.
    Matrix x(8, 2);
    x << -2, -1, -1.5, -2, -1, -1.2, -2.2, -0.8, 2, 1, 1.5, 2, 1, 1.2, 2.2, 0.8;
    const Matrix t = one_hot({0, 0, 0, 0, 1, 1, 1, 1}, 2);
    const Network net = init_network(2, 3, 2, 5);

    SUBCASE("zero learning rate leaves parameters unchanged") {
        CHECK(sgd_epoch(net, x, t, {0.0, 1, 1, 9}) == net);
    }
    SUBCASE("one epoch lowers training CE on separable data") {
        const double before = cross_entropy(forward(net, x), t);
        const Network after = sgd_epoch(net, x, t, {0.1, 1, 1, 9});
        CHECK(cross_entropy(forward(after, x), t) < before);
    }
    SUBCASE("same shuffle seed reproduces the same parameters") {
        CHECK(sgd_epoch(net, x, t, {0.1, 1, 1, 3}) == sgd_epoch(net, x, t, {0.1, 1, 1, 3}));
        CHECK_FALSE(sgd_epoch(net, x, t, {0.1, 1, 1, 3}) == sgd_epoch(net, x, t, {0.1, 1, 1, 4}));
    }
    CHECK_THROWS_AS(sgd_epoch(net, x, one_hot({0, 1}, 2), {}), DimensionError);
}

TEST_CASE("train_with_early_stopping") {
    Rng rng(99);
    const Matrix x = random_matrix(rng, 40, 3);
    std::vector<int> labels;
    for (Eigen::Index r = 0; r < x.rows(); ++r) labels.push_back(x(r, 0) + 0.5 * x(r, 1) > 0 ? 1 : 0);
    const Matrix t = one_hot(labels, 2);
    const Matrix xv = x.topRows(15);
    const Matrix tv = t.topRows(15);
    const Network net = init_network(3, 6, 2, 17);
    const double initial = cross_entropy(forward(net, xv), tv);

    SUBCASE("max_epochs = 0 returns the input") {
        const auto r = train_with_early_stopping(net, x, t, xv, tv, {0.1, 0, 5, 1});
        CHECK(r.net == net);
        CHECK(r.validation_ce == initial);
        CHECK(r.epochs_run == 0);
    }
    SUBCASE("result is the best snapshot seen") {
        const auto r = train_with_early_stopping(net, x, t, xv, tv, {0.1, 200, 10, 1});
        CHECK(r.validation_ce <= initial);
        CHECK(cross_entropy(forward(r.net, xv), tv) == r.validation_ce);
    }
    SUBCASE("patience 1 stops on the first stalled epoch") {
        // A learning rate this large overshoots immediately, so the first epoch stalls.
        const auto trained = train_with_early_stopping(net, x, t, xv, tv, {0.1, 500, 30, 1}).net;
        const auto r = train_with_early_stopping(trained, x, t, xv, tv, {50.0, 500, 1, 2});
        CHECK(r.epochs_run == 1);
        CHECK(r.net == trained);
    }
    SUBCASE("deterministic") {
        const auto a = train_with_early_stopping(net, x, t, xv, tv, {0.1, 50, 5, 4});
        const auto b = train_with_early_stopping(net, x, t, xv, tv, {0.1, 50, 5, 4});
        CHECK(a.net == b.net);
    }
}

TEST_CASE("apply_mask and prune") {
    Rng rng(31);
    const Network net = init_network(3, 5, 4, 8);
    const Matrix x = random_matrix(rng, 7, 3, 3.0);

    CHECK((apply_mask(net, Mask(5, 1), x) - forward(net, x)).cwiseAbs().maxCoeff() == 0.0);

    const Matrix none = apply_mask(net, Mask(5, 0), x);
    const Matrix bias_only = softmax_rows(net.b1.transpose().replicate(7, 1));
    CHECK((none - bias_only).cwiseAbs().maxCoeff() <= 1e-15);

    const Network same = prune(net, Mask(5, 1));
    CHECK(same == net);

    SUBCASE("N = 3, bits 101") {
        const Network parent = init_network(2, 3, 3, 4);
        const Mask bits{1, 0, 1};
        const Network child = prune(parent, bits);
        CHECK(child.hidden() == 2);
        CHECK(child.w.col(1) == parent.w.col(2));
        CHECK(child.v.row(1) == parent.v.row(2));
        CHECK(child.b0(1) == parent.b0(2));
        const Matrix xs = random_matrix(rng, 20, 2, 4.0);
        CHECK((forward(child, xs) - apply_mask(parent, bits, xs)).cwiseAbs().maxCoeff() <= 1e-12);
    }
    SUBCASE("equivalence on random networks and masks") {
        double worst = 0.0;
        for (int trial = 0; trial < 100; ++trial) {
            const auto N = 1 + rng.index(8);
            const Network p = init_network(1 + rng.index(5), N, 2 + rng.index(4), rng.next());
            Mask bits(N);
            do {
                for (auto& b : bits) b = static_cast<std::uint8_t>(rng.index(2));
            } while (popcount(bits) == 0);
            const Matrix xs = random_matrix(rng, 10, static_cast<Eigen::Index>(p.inputs()), 3.0);
            worst = std::max(worst, (forward(prune(p, bits), xs) - apply_mask(p, bits, xs)).cwiseAbs().maxCoeff());
        }
        CHECK(worst <= 1e-12);
    }
    CHECK_THROWS_AS(prune(init_network(2, 3, 2, 1), Mask{0, 0, 0}), DimensionError);
    CHECK_THROWS_AS(apply_mask(net, Mask(4, 1), x), DimensionError);
}

TEST_CASE("accuracy") {
    Matrix perfect(3, 3);
    perfect << 1, 0, 0, 0, 1, 0, 0, 0, 1;
    CHECK(accuracy(perfect, {0, 1, 2}) == 1.0);

    const Matrix uniform = Matrix::Constant(4, 3, 1.0 / 3.0);
    CHECK(predict(uniform) == std::vector<int>{0, 0, 0, 0});
    CHECK(accuracy(uniform, {0, 1, 0, 2}) == 0.5);

    SUBCASE("matches an independent confusion-matrix count") {
        Rng rng(5);
        const Network net = init_network(3, 4, 3, 12);
        const Matrix x = random_matrix(rng, 60, 3, 2.0);
        std::vector<int> labels;
        for (int i = 0; i < 60; ++i) labels.push_back(static_cast<int>(rng.index(3)));
        const Matrix p = forward(net, x);
        int confusion[3][3] = {};
        for (Eigen::Index r = 0; r < p.rows(); ++r) {
            Eigen::Index best;
            p.row(r).maxCoeff(&best);
            confusion[labels[static_cast<std::size_t>(r)]][best]++;
        }
        const double diag = confusion[0][0] + confusion[1][1] + confusion[2][2];
        const double acc = accuracy(net, x, labels);
        CHECK(acc == doctest::Approx(diag / 60.0));
        CHECK(acc >= 0.0);
        CHECK(acc <= 1.0);
    }
    CHECK_THROWS_AS(accuracy(Matrix(0, 3), {}), DimensionError);
}

TEST_CASE("network JSON round-trips bit-exactly") {
    const Network net = init_network(4, 7, 3, 123);
    const std::string text = nlohmann::json(net).dump();
    const Network back = nlohmann::json::parse(text).get<Network>();
    CHECK(back == net);
    const auto j = nlohmann::json::parse(text);
    CHECK(j.at("I") == 4);
    CHECK(j.at("N") == 7);
    CHECK(j.at("K") == 3);
    CHECK(j.at("W").size() == 4);
    CHECK(j.at("V").size() == 7);

    auto broken = j;
    broken["B0"].erase(0);
    CHECK_THROWS_AS(broken.get<Network>(), DimensionError);
}
