#include "msbaco/dataset.hpp"

#include "msbaco/rng.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

namespace msbaco {

namespace {

std::string trim(std::string_view s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    auto e = s.find_last_not_of(" \t\r\n");
    std::string out(s.substr(b, e - b + 1));
    if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
    return out;
}

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (char c : line) {
        if (c == '"') {
            quoted = !quoted;
            cell.push_back(c);
        } else if (c == ',' && !quoted) {
            cells.push_back(trim(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    cells.push_back(trim(cell));
    return cells;
}

bool parse_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

}  // namespace

Dataset make_dataset(Matrix features, const std::vector<std::string>& raw_labels) {
    if (static_cast<std::size_t>(features.rows()) != raw_labels.size()) {
        throw DatasetError("feature rows and label count differ");
    }
    if (features.cols() < 1) throw DatasetError("dataset has no feature columns");
    if (!features.allFinite()) throw DatasetError("dataset contains non-finite feature values");

    Dataset ds;
    ds.features = std::move(features);
    std::unordered_map<std::string, int> index;
    ds.labels.reserve(raw_labels.size());
    for (const auto& label : raw_labels) {
        auto [it, inserted] = index.emplace(label, static_cast<int>(ds.class_names.size()));
        if (inserted) ds.class_names.push_back(label);
        ds.labels.push_back(it->second);
    }
    if (ds.class_count() < 2) {
        throw DatasetError("dataset has a single class; at least two are required");
    }
    if (ds.sample_count() < ds.class_count()) {
        throw DatasetError("dataset has fewer rows than classes");
    }
    for (std::size_t j = 0; j < ds.feature_count(); ++j) ds.feature_names.push_back("x" + std::to_string(j));
    return ds;
}

Dataset load_csv(const std::filesystem::path& path, const CsvOptions& options) {
    std::ifstream in(path);
    if (!in) throw DatasetError("cannot read dataset file: " + path.string());

    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> header;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first && line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
        if (trim(line).empty()) continue;
        auto cells = split_line(line);
        if (first && options.has_header) {
            header = std::move(cells);
        } else {
            rows.push_back(std::move(cells));
        }
        first = false;
    }
    if (rows.empty()) throw DatasetError("dataset file has no data rows: " + path.string());

    const std::size_t width = header.empty() ? rows.front().size() : header.size();
    if (width < 2) throw DatasetError("dataset needs at least one feature column and a label column");

    std::size_t label_col = 0;
    if (const auto* name = std::get_if<std::string>(&options.label_column)) {
        if (header.empty()) throw DatasetError("label column selected by name but the file has no header");
        auto it = std::find(header.begin(), header.end(), *name);
        if (it == header.end()) throw DatasetError("label column '" + *name + "' not found in header");
        label_col = static_cast<std::size_t>(it - header.begin());
    } else {
        int idx = std::get<int>(options.label_column);
        if (idx < 0) idx += static_cast<int>(width);
        if (idx < 0 || idx >= static_cast<int>(width)) {
            throw DatasetError("label column index out of range");
        }
        label_col = static_cast<std::size_t>(idx);
    }

    Matrix features(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width - 1));
    std::vector<std::string> labels;
    labels.reserve(rows.size());
    const std::size_t first_data_line = options.has_header ? 2 : 1;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto& cells = rows[r];
        if (cells.size() != width) {
            std::ostringstream msg;
            msg << path.string() << ": row " << r + first_data_line << " has " << cells.size()
                << " columns, expected " << width;
            throw DatasetError(msg.str());
        }
        Eigen::Index out_col = 0;
        for (std::size_t c = 0; c < width; ++c) {
            if (c == label_col) continue;
            double v = 0.0;
            if (!parse_double(cells[c], v) || !std::isfinite(v)) {
                std::ostringstream msg;
                msg << path.string() << ": non-numeric feature value '" << cells[c] << "' at row "
                    << r + first_data_line << ", column " << c + 1;
                if (!header.empty()) msg << " (" << header[c] << ")";
                throw DatasetError(msg.str());
            }
            features(static_cast<Eigen::Index>(r), out_col++) = v;
        }
        labels.push_back(cells[label_col]);
    }

    Dataset ds = make_dataset(std::move(features), labels);
    if (!header.empty()) {
        ds.feature_names.clear();
        for (std::size_t c = 0; c < width; ++c)
            if (c != label_col) ds.feature_names.push_back(header[c]);
    }
    return ds;
}

SplitSizes split_sizes(std::size_t rows) {
    const std::size_t train = rows / 2;
    const std::size_t validation = (rows - train) / 2;
    return {train, validation, rows - train - validation};
}

SplitSet split(const Dataset& ds, Seed seed) {
    const std::size_t n = ds.sample_count();
    if (n < 4) throw DatasetError("need at least 4 rows to form train/validation/test partitions");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    rng.shuffle(std::span(order));

    const auto sizes = split_sizes(n);
    SplitSet out;
    auto it = order.begin();
    out.train.assign(it, it + static_cast<std::ptrdiff_t>(sizes.train));
    it += static_cast<std::ptrdiff_t>(sizes.train);
    out.validation.assign(it, it + static_cast<std::ptrdiff_t>(sizes.validation));
    it += static_cast<std::ptrdiff_t>(sizes.validation);
    out.test.assign(it, order.end());
    return out;
}

Dataset normalize(const Dataset& ds, SplitSet& splits) {
    const auto cols = ds.features.cols();
    if (splits.train.empty()) throw DatasetError("normalize: empty training partition");
    for (auto r : splits.train)
        if (r >= ds.sample_count()) throw DatasetError("normalize: split does not belong to this dataset");

    const Matrix train = take_rows(ds.features, splits.train);
    const auto rows = static_cast<double>(train.rows());
    Vector mean = train.colwise().mean().transpose();
    Vector stddev(cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        stddev(j) = std::sqrt((train.col(j).array() - mean(j)).square().sum() / rows);
    }

    Dataset out = ds;
    for (Eigen::Index j = 0; j < cols; ++j) {
        // Relative test catches columns that are constant up to rounding.
        if (stddev(j) <= 1e-12 * std::max(1.0, std::abs(mean(j)))) {
            out.features.col(j).setZero();
        } else {
            out.features.col(j) = (ds.features.col(j).array() - mean(j)) / stddev(j);
        }
    }
    splits.norm_stats = {std::move(mean), std::move(stddev)};
    return out;
}

Matrix encode_targets(const Dataset& ds) {
    Matrix one_hot = Matrix::Zero(static_cast<Eigen::Index>(ds.sample_count()),
                                  static_cast<Eigen::Index>(ds.class_count()));
    for (std::size_t r = 0; r < ds.sample_count(); ++r) {
        one_hot(static_cast<Eigen::Index>(r), ds.labels[r]) = 1.0;
    }
    return one_hot;
}

Matrix take_rows(const Matrix& m, const std::vector<std::size_t>& rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

std::vector<int> take(const std::vector<int>& labels, const std::vector<std::size_t>& rows) {
    std::vector<int> out;
    out.reserve(rows.size());
    for (auto r : rows) out.push_back(labels[r]);
    return out;
}

PreparedData prepare(const Dataset& raw, Seed split_seed) {
    PreparedData p;
    p.splits = split(raw, split_seed);
    p.dataset = normalize(raw, p.splits);
    const Matrix targets = encode_targets(p.dataset);
    auto fill = [&](Partition& part, const std::vector<std::size_t>& rows) {
        part.x = take_rows(p.dataset.features, rows);
        part.targets = take_rows(targets, rows);
        part.labels = take(p.dataset.labels, rows);
    };
    fill(p.train, p.splits.train);
    fill(p.validation, p.splits.validation);
    fill(p.test, p.splits.test);
    return p;
}

}  // namespace msbaco
