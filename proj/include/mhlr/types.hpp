#pragma once

#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace mhlr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Base class of all library errors.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File access or parse failure.
class io_error : public error {
 public:
  using error::error;
};

/// Violated input contract: shapes, ranges, non-finite values.
class validation_error : public error {
 public:
  using error::error;
};

/// Bad run configuration: unknown key, out-of-range hyperparameter.
class config_error : public error {
 public:
  using error::error;
};

/// Geometry too degenerate to build a regularizer (rank loss, zero spread).
class degenerate_geometry_error : public error {
 public:
  using error::error;
};

}  // namespace mhlr
