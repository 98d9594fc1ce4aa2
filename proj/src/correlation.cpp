#include "msbaco/correlation.hpp"

#include <algorithm>
#include <cmath>

namespace msbaco {

Matrix correlation_matrix(const Matrix& activations) {
    if (activations.rows() < 2) throw DimensionError("correlation needs at least 2 rows");
    if (activations.cols() < 1) throw DimensionError("correlation needs at least 1 column");

    const auto n = activations.cols();
    Matrix centered = activations.rowwise() - activations.colwise().mean();
    Vector norms = centered.colwise().norm().transpose();
    Matrix r = Matrix::Identity(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            double value = 0.0;
            if (norms(i) > 0.0 && norms(j) > 0.0) {
                value = centered.col(i).dot(centered.col(j)) / (norms(i) * norms(j));
                value = std::clamp(value, -1.0, 1.0);
            }
            r(i, j) = value;
            r(j, i) = value;
        }
    }
    return r;
}

std::vector<std::size_t> abs_correlation_histogram(const Matrix& r, std::size_t bins) {
    std::vector<std::size_t> counts(bins, 0);
    if (bins == 0) return counts;
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        for (Eigen::Index j = i + 1; j < r.cols(); ++j) {
            const double a = std::abs(r(i, j));
            auto bin = static_cast<std::size_t>(a * static_cast<double>(bins));
            counts[std::min(bin, bins - 1)]++;
        }
    }
    return counts;
}

}  // namespace msbaco
