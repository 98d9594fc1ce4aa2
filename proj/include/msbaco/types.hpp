#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace msbaco {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Seed = std::uint64_t;

/// One bit per hidden neuron; 1 keeps the neuron.
using Mask = std::vector<std::uint8_t>;

inline std::size_t popcount(const Mask& bits) {
    std::size_t n = 0;
    for (auto b : bits) n += b ? 1 : 0;
    return n;
}

inline std::string to_string(const Mask& bits) {
    std::string s;
    s.reserve(bits.size());
    for (auto b : bits) s.push_back(b ? '1' : '0');
    return s;
}

// Error hierarchy. The CLI maps these onto exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DatasetError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

}  // namespace msbaco
