/**
 * Copyright (c) 2026 by Contributors
 * @file common.hpp
 * @brief Shared aliases and error types.
 */
#ifndef STGAT_COMMON_HPP_
#define STGAT_COMMON_HPP_

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace stgat {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Base class for all engine errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Incompatible tensor/matrix shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration value (bad activation name, dropout >= 1, T < 1, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Invalid input data: parse errors, dangling references, coverage gaps,
/// non-consecutive windows, checkpoint integrity problems.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values where finite ones are required, training divergence.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// A node ended up with no neighbors to attend over.
class EmptyNeighborhoodError : public Error {
 public:
  using Error::Error;
};

inline std::string shape_str(const Matrix& m) {
  return "[" + std::to_string(m.rows()) + "x" + std::to_string(m.cols()) + "]";
}

inline std::string shape_str(Eigen::Index rows, Eigen::Index cols) {
  return "[" + std::to_string(rows) + "x" + std::to_string(cols) + "]";
}

}  // namespace stgat

#endif  // STGAT_COMMON_HPP_
