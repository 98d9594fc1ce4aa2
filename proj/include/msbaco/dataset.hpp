#pragma once

#include "msbaco/types.hpp"

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace msbaco {

/// Feature matrix (rows = samples) plus dense integer labels in [0, K).
struct Dataset {
    Matrix features;
    std::vector<int> labels;
    std::vector<std::string> class_names;  // index -> original label text
    std::vector<std::string> feature_names;

    std::size_t sample_count() const { return static_cast<std::size_t>(features.rows()); }
    std::size_t feature_count() const { return static_cast<std::size_t>(features.cols()); }
    std::size_t class_count() const { return class_names.size(); }
};

/// Label column chosen by header name or by zero-based index.
/// A negative index counts from the end (-1 is the last column).
using ColumnSelector = std::variant<std::string, int>;

struct CsvOptions {
    ColumnSelector label_column = -1;
    bool has_header = true;
};

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options = {});

/// Builds a dataset from in-memory values; labels are re-indexed densely
/// in first-appearance order exactly like load_csv.
Dataset make_dataset(Matrix features, const std::vector<std::string>& raw_labels);

struct NormStats {
    Vector mean;
    Vector stddev;
};

struct SplitSet {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
    std::vector<std::size_t> test;
    NormStats norm_stats;  // filled by normalize()
};

/// Partition sizes for L rows: train = floor(L/2), validation = floor((L - train)/2),
/// test = the rest.
struct SplitSizes {
    std::size_t train, validation, test;
};
SplitSizes split_sizes(std::size_t rows);

SplitSet split(const Dataset& ds, Seed seed);

/// Z-scores every row with statistics fitted on the training rows only.
/// Fills splits.norm_stats. Features with zero training variance become 0.
Dataset normalize(const Dataset& ds, SplitSet& splits);

/// L x K one-hot matrix.
Matrix encode_targets(const Dataset& ds);

/// Rows of a matrix selected by index.
Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& rows);
std::vector<int> take(const std::vector<int>& labels, const std::vector<std::size_t>& rows);

/// Normalized features and one-hot targets for each partition.
struct Partition {
    Matrix x;
    Matrix targets;
    std::vector<int> labels;
};

struct PreparedData {
    Dataset dataset;  // normalized
    SplitSet splits;
    Partition train, validation, test;
};

/// split -> normalize -> encode, in that order.
PreparedData prepare(const Dataset& raw, Seed split_seed);

}  // namespace msbaco
