#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "mhlr/csv.hpp"
#include "mhlr/types.hpp"

namespace mhlr {

/// k-nearest-neighbor lists, self excluded, each sorted ascending by
/// distance with ties broken by ascending index.
struct NeighborGraph {
  std::vector<std::vector<Index>> neighbors;
  std::vector<std::vector<double>> distances;

  Index size() const { return static_cast<Index>(neighbors.size()); }
};

enum class Metric { euclidean };

inline NeighborGraph knn_graph(const Matrix& features, Index k, Metric = Metric::euclidean) {
  const Index n = features.rows();
  if (k < 1 || k > n - 1) {
    throw validation_error("knn_graph: k must lie in [1, n-1]; k=" + std::to_string(k) +
                           ", n=" + std::to_string(n));
  }
  NeighborGraph g;
  g.neighbors.resize(static_cast<std::size_t>(n));
  g.distances.resize(static_cast<std::size_t>(n));
  std::vector<std::pair<double, Index>> cand(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    std::size_t at = 0;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      cand[at++] = {(features.row(i) - features.row(j)).norm(), j};
    }
    std::partial_sort(cand.begin(), cand.begin() + k, cand.end());
    auto& nbr = g.neighbors[static_cast<std::size_t>(i)];
    auto& dst = g.distances[static_cast<std::size_t>(i)];
    nbr.resize(static_cast<std::size_t>(k));
    dst.resize(static_cast<std::size_t>(k));
    for (Index t = 0; t < k; ++t) {
      dst[static_cast<std::size_t>(t)] = cand[static_cast<std::size_t>(t)].first;
      nbr[static_cast<std::size_t>(t)] = cand[static_cast<std::size_t>(t)].second;
    }
  }
  return g;
}

enum class RegularizerKind { laplacian, hessian };

enum class EdgeWeighting { binary, heat };

inline EdgeWeighting edge_weighting_from_string(const std::string& s) {
  if (s == "binary") return EdgeWeighting::binary;
  if (s == "heat") return EdgeWeighting::heat;
  throw config_error("unknown edge weighting: '" + s + "' (expected binary or heat)");
}

/// Symmetric PSD matrix whose quadratic form measures roughness of a
/// function sampled at the data points. Constants lie in the nullspace of
/// both kinds; for the Hessian kind, functions linear along the manifold do
/// as well.
struct RegularizerMatrix {
  Matrix values;
  RegularizerKind kind = RegularizerKind::laplacian;
  Index neighborhood_size = 0;
  Index intrinsic_dim = 0;  // hessian only

  /// Debug dump as coordinate-list text: row, col, value.
  void dump_coordinate_list(const std::string& path, double drop_below = 0.0) const {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write file: " + path);
    for (Index r = 0; r < values.rows(); ++r)
      for (Index c = 0; c < values.cols(); ++c)
        if (std::abs(values(r, c)) > drop_below)
          out << r << ',' << c << ',' << csv::format_double(values(r, c)) << '\n';
  }
};

/// Unnormalized graph Laplacian L = D - W over the OR-symmetrized kNN graph.
/// Heat weights use a global scale sigma = mean kNN distance.
inline RegularizerMatrix graph_laplacian(const Matrix& features, Index k,
                                         EdgeWeighting weighting = EdgeWeighting::heat) {
  const NeighborGraph g = knn_graph(features, k);
  const Index n = g.size();

  double sigma = 0.0;
  if (weighting == EdgeWeighting::heat) {
    double sum = 0.0;
    for (const auto& dl : g.distances)
      for (double d : dl) sum += d;
    sigma = sum / (static_cast<double>(n) * static_cast<double>(k));
    if (!(sigma > 0.0)) {
      throw degenerate_geometry_error("all inter-point distances are zero; "
                                      "heat weights are undefined");
    }
  }

  Matrix w = Matrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    const auto& nbr = g.neighbors[static_cast<std::size_t>(i)];
    const auto& dst = g.distances[static_cast<std::size_t>(i)];
    for (std::size_t t = 0; t < nbr.size(); ++t) {
      const Index j = nbr[t];
      const double d = dst[t];
      const double wij = weighting == EdgeWeighting::binary
                             ? 1.0
                             : std::exp(-(d * d) / (2.0 * sigma * sigma));
      w(i, j) = wij;
      w(j, i) = wij;
    }
  }

  Matrix lap = -w;
  for (Index i = 0; i < n; ++i) lap(i, i) = w.row(i).sum();

  return RegularizerMatrix{std::move(lap), RegularizerKind::laplacian, k, 0};
}

/// Coordinates of a neighborhood on its top-d principal directions.
/// Rows come back centered; columns are mutually orthogonal.
inline Matrix local_tangent_coordinates(const Matrix& neighborhood, Index intrinsic_dim) {
  const Index rows = neighborhood.rows();
  const Index dim = neighborhood.cols();
  const Index d = intrinsic_dim;
  if (d < 1 || d > std::min(rows, dim)) {
    throw validation_error("intrinsic_dim must lie in [1, min(rows, cols)]");
  }
  const Index fit_cols = 1 + d + d * (d + 1) / 2;
  if (rows < fit_cols) {
    throw validation_error("neighborhood of " + std::to_string(rows) +
                           " points cannot determine a quadratic fit in " +
                           std::to_string(d) + " dims (needs >= " +
                           std::to_string(fit_cols) + ")");
  }

  Matrix centered = neighborhood.rowwise() - neighborhood.colwise().mean();
  Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  if (!(sv[0] > 0.0) || sv[d - 1] <= 1e-10 * sv[0]) {
    throw degenerate_geometry_error("neighborhood rank below intrinsic dimension " +
                                    std::to_string(d));
  }
  return centered * svd.matrixV().leftCols(d);
}

namespace detail {

/// Design matrix [1 | U | u_a u_b for a <= b], columns in that fixed order.
inline Matrix quadratic_design(const Matrix& tangent) {
  const Index rows = tangent.rows();
  const Index d = tangent.cols();
  Matrix phi(rows, 1 + d + d * (d + 1) / 2);
  phi.col(0).setOnes();
  phi.middleCols(1, d) = tangent;
  Index at = 1 + d;
  for (Index a = 0; a < d; ++a)
    for (Index b = a; b < d; ++b)
      phi.col(at++) = tangent.col(a).cwiseProduct(tangent.col(b));
  return phi;
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. A column whose
/// residual norm falls below 1e-10 signals a degenerate neighborhood.
inline Matrix orthonormalize_columns(const Matrix& m) {
  Matrix q = m;
  for (Index c = 0; c < q.cols(); ++c) {
    for (int pass = 0; pass < 2; ++pass) {
      for (Index p = 0; p < c; ++p) {
        q.col(c) -= q.col(p).dot(q.col(c)) * q.col(p);
      }
    }
    const double norm = q.col(c).norm();
    if (norm < 1e-10) {
      throw degenerate_geometry_error("degenerate neighborhood: design column " +
                                      std::to_string(c) + " lies in the span of its "
                                      "predecessors");
    }
    q.col(c) /= norm;
  }
  return q;
}

}  // namespace detail

/// The per-neighborhood Hessian estimator: orthonormalize the quadratic
/// design over the tangent coordinates and keep the d(d+1)/2 directions that
/// are orthogonal to the constant and linear parts. Row space spans the
/// pure-curvature component of any function sampled on the neighborhood.
inline Matrix local_hessian_operator(const Matrix& tangent) {
  const Index d = tangent.cols();
  const Index quad = d * (d + 1) / 2;
  const Matrix q = detail::orthonormalize_columns(detail::quadratic_design(tangent));
  return q.rightCols(quad).transpose();
}

/// Accumulates B = sum_i H_i^T H_i over anchor-plus-k-nearest neighborhoods.
/// f^T B f estimates the integrated squared second derivative of f along the
/// manifold; symmetric PSD by construction, constants and manifold-linear
/// functions in the nullspace.
inline RegularizerMatrix hessian_energy_matrix(const Matrix& features, Index k,
                                               Index intrinsic_dim) {
  const Index d = intrinsic_dim;
  const Index fit_cols = 1 + d + d * (d + 1) / 2;
  if (k < fit_cols) {
    throw validation_error("hessian_energy_matrix: k=" + std::to_string(k) +
                           " too small for intrinsic_dim=" + std::to_string(d) +
                           " (needs k >= " + std::to_string(fit_cols) + ")");
  }
  const NeighborGraph g = knn_graph(features, k);
  const Index n = features.rows();

  Matrix b = Matrix::Zero(n, n);
  std::vector<Index> hood(static_cast<std::size_t>(k + 1));
  Matrix local(k + 1, features.cols());
  for (Index i = 0; i < n; ++i) {
    hood[0] = i;  // anchor first
    const auto& nbr = g.neighbors[static_cast<std::size_t>(i)];
    for (Index t = 0; t < k; ++t) hood[static_cast<std::size_t>(t + 1)] = nbr[static_cast<std::size_t>(t)];
    for (Index r = 0; r <= k; ++r) local.row(r) = features.row(hood[static_cast<std::size_t>(r)]);

    const Matrix tangent = local_tangent_coordinates(local, d);
    const Matrix h = local_hessian_operator(tangent);
    Matrix s = h.transpose() * h;
    s = 0.5 * (s + s.transpose()).eval();

    for (Index r = 0; r <= k; ++r)
      for (Index c = 0; c <= k; ++c)
        b(hood[static_cast<std::size_t>(r)], hood[static_cast<std::size_t>(c)]) += s(r, c);
  }

  return RegularizerMatrix{std::move(b), RegularizerKind::hessian, k, d};
}

}  // namespace mhlr
