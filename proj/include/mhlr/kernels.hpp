#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <vector>

#include "mhlr/types.hpp"

namespace mhlr {

enum class KernelKind { linear, rbf };

inline std::string to_string(KernelKind kind) {
  return kind == KernelKind::linear ? "linear" : "rbf";
}

inline KernelKind kernel_kind_from_string(const std::string& s) {
  if (s == "linear") return KernelKind::linear;
  if (s == "rbf") return KernelKind::rbf;
  throw config_error("unknown kernel kind: '" + s + "' (expected linear or rbf)");
}

/// Per-view kernel choice. For rbf, bandwidth 0 means "resolve from data"
/// via the median pairwise distance heuristic; gram/cross evaluation
/// requires a resolved (positive) bandwidth.
struct KernelSpec {
  KernelKind kind = KernelKind::rbf;
  double bandwidth = 0.0;

  bool resolved() const { return kind == KernelKind::linear || bandwidth > 0.0; }

  void require_resolved() const {
    if (!resolved()) {
      throw validation_error("rbf kernel requires a positive bandwidth; "
                             "resolve it from data first");
    }
    if (kind == KernelKind::rbf && !std::isfinite(bandwidth)) {
      throw validation_error("rbf bandwidth must be finite");
    }
  }
};

/// Nonnegative view weights summing to one (the theta and beta vectors).
class SimplexWeights {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit SimplexWeights(Vector w) : weights_(std::move(w)) {
    if (weights_.size() < 1) throw validation_error("simplex weights must have length >= 1");
    for (Index i = 0; i < weights_.size(); ++i) {
      if (!(weights_[i] >= 0.0)) {
        throw validation_error("simplex weight " + std::to_string(i) + " is negative or NaN");
      }
    }
    if (std::abs(weights_.sum() - 1.0) > kSumTolerance) {
      throw validation_error("simplex weights sum to " + std::to_string(weights_.sum()) +
                             ", expected 1");
    }
  }

  static SimplexWeights uniform(Index count) {
    return SimplexWeights(Vector::Constant(count, 1.0 / static_cast<double>(count)));
  }

  static SimplexWeights one_hot(Index count, Index which) {
    Vector w = Vector::Zero(count);
    w[which] = 1.0;
    return SimplexWeights(std::move(w));
  }

  Index size() const { return weights_.size(); }
  double operator[](Index i) const { return weights_[i]; }
  const Vector& values() const { return weights_; }

 private:
  Vector weights_;
};

using GramMatrix = Matrix;

namespace detail {

/// Build counter; lets tests assert how often Gram matrices are constructed.
inline std::atomic<long> gram_build_calls{0};

inline void require_finite(const Matrix& features, const char* what) {
  if (!features.allFinite()) {
    throw validation_error(std::string(what) + " contains non-finite entries");
  }
}

inline double kernel_value(const KernelSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& a,
                           const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  if (spec.kind == KernelKind::linear) return a.dot(b);
  const double d2 = (a - b).squaredNorm();
  return std::exp(-d2 / (2.0 * spec.bandwidth * spec.bandwidth));
}

}  // namespace detail

/// Median pairwise Euclidean distance of the rows; the rbf bandwidth default.
inline double median_pairwise_distance(const Matrix& features) {
  const Index n = features.rows();
  if (n < 2) {
    throw degenerate_geometry_error("median heuristic needs at least two rows");
  }
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      dists.push_back((features.row(i) - features.row(j)).norm());
  auto mid = dists.begin() + static_cast<std::ptrdiff_t>(dists.size() / 2);
  std::nth_element(dists.begin(), mid, dists.end());
  return *mid;
}

/// Fills an unresolved rbf bandwidth from the data; returns the spec otherwise.
inline KernelSpec resolve_bandwidth(const KernelSpec& spec, const Matrix& features) {
  if (spec.resolved()) return spec;
  double med = median_pairwise_distance(features);
  if (!(med > 0.0)) {
    throw degenerate_geometry_error("median pairwise distance is zero; cannot "
                                    "resolve an rbf bandwidth");
  }
  return KernelSpec{spec.kind, med};
}

/// n x n Gram matrix of the rows under the kernel spec.
/// The upper triangle is computed and mirrored, so symmetry is exact.
inline GramMatrix gram_matrix(const Matrix& features, const KernelSpec& spec) {
  detail::require_finite(features, "feature matrix");
  spec.require_resolved();
  detail::gram_build_calls.fetch_add(1, std::memory_order_relaxed);
  const Index n = features.rows();
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double v = detail::kernel_value(spec, features.row(i), features.row(j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

/// m x n matrix of kernel values k(query_q, train_i); restricted to
/// query == train this reproduces gram_matrix bit for bit.
inline Matrix cross_kernel(const Matrix& train_features, const Matrix& query_features,
                           const KernelSpec& spec) {
  detail::require_finite(train_features, "train feature matrix");
  detail::require_finite(query_features, "query feature matrix");
  spec.require_resolved();
  if (train_features.cols() != query_features.cols()) {
    throw validation_error("cross_kernel: train has " + std::to_string(train_features.cols()) +
                           " columns, query has " + std::to_string(query_features.cols()));
  }
  Matrix k(query_features.rows(), train_features.rows());
  for (Index q = 0; q < query_features.rows(); ++q)
    for (Index i = 0; i < train_features.rows(); ++i)
      k(q, i) = detail::kernel_value(spec, query_features.row(q), train_features.row(i));
  return k;
}

/// Entrywise convex combination of same-shaped symmetric matrices.
/// Zero-weight parts are skipped, so one-hot weights return the part exactly.
inline Matrix combine_matrices(const std::vector<Matrix>& parts, const SimplexWeights& weights) {
  if (parts.empty()) throw validation_error("combine_matrices: no parts");
  if (weights.size() != static_cast<Index>(parts.size())) {
    throw validation_error("combine_matrices: " + std::to_string(parts.size()) +
                           " parts but " + std::to_string(weights.size()) + " weights");
  }
  const Index rows = parts.front().rows();
  const Index cols = parts.front().cols();
  for (const Matrix& p : parts) {
    if (p.rows() != rows || p.cols() != cols) {
      throw validation_error("combine_matrices: parts disagree in shape");
    }
  }
  Matrix acc = Matrix::Zero(rows, cols);
  for (std::size_t k = 0; k < parts.size(); ++k) {
    const double w = weights[static_cast<Index>(k)];
    if (w == 0.0) continue;
    acc += w * parts[k];
  }
  return acc;
}

}  // namespace mhlr
