#pragma once

#include "msbaco/types.hpp"

namespace msbaco {

/// Pearson correlation between the columns of an L x N activation matrix.
/// Pairs involving a constant column get 0; the diagonal is always 1.
Matrix correlation_matrix(const Matrix& activations);

/// Counts of |R_ij| (i < j) in `bins` equal-width bins over [0, 1].
std::vector<std::size_t> abs_correlation_histogram(const Matrix& r, std::size_t bins = 20);

}  // namespace msbaco
