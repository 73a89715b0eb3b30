#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "mhlr/dataset.hpp"
#include "mhlr/manifold.hpp"
#include "oracles.hpp"

using namespace mhlr;

namespace {

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("knn graph on 1-D points {0, 1, 3} with k=1") {
  Matrix x(3, 1);
  x << 0, 1, 3;
  const NeighborGraph g = knn_graph(x, 1);
  CHECK(g.neighbors[0] == std::vector<Index>{1});
  CHECK(g.neighbors[1] == std::vector<Index>{0});
  CHECK(g.neighbors[2] == std::vector<Index>{1});
}

TEST_CASE("knn graph with k = n-1 lists every other point") {
  mhlr::Rng rng(1);
  const Matrix x = oracles::random_matrix(rng, 8, 2);
  const NeighborGraph g = knn_graph(x, 7);
  for (Index i = 0; i < 8; ++i) {
    std::vector<Index> sorted = g.neighbors[static_cast<std::size_t>(i)];
    std::sort(sorted.begin(), sorted.end());
    std::vector<Index> expect;
    for (Index j = 0; j < 8; ++j) {
      if (j != i) expect.push_back(j);
    }
    CHECK(sorted == expect);
    for (std::size_t t = 1; t < g.distances[static_cast<std::size_t>(i)].size(); ++t) {
      CHECK(g.distances[static_cast<std::size_t>(i)][t] >=
            g.distances[static_cast<std::size_t>(i)][t - 1]);
    }
  }
}

TEST_CASE("duplicate points tie to each other by index, not an error") {
  Matrix x(3, 2);
  x << 2, 2, 2, 2, 9, 9;
  const NeighborGraph g = knn_graph(x, 1);
  CHECK(g.neighbors[0] == std::vector<Index>{1});
  CHECK(g.distances[0][0] == 0.0);
  CHECK(g.neighbors[1] == std::vector<Index>{0});
  CHECK(g.neighbors[2] == std::vector<Index>{0});  // equidistant, lower index wins
}

TEST_CASE("knn rejects k outside [1, n-1]") {
  Matrix x = Matrix::Random(5, 2);
  CHECK_THROWS_AS(knn_graph(x, 0), validation_error);
  CHECK_THROWS_AS(knn_graph(x, 5), validation_error);
}

TEST_CASE("two-point binary Laplacian is [[1,-1],[-1,1]]") {
  Matrix x(2, 1);
  x << 0, 2;
  const RegularizerMatrix lap = graph_laplacian(x, 1, EdgeWeighting::binary);
  Matrix expect(2, 2);
  expect << 1, -1, -1, 1;
  CHECK((lap.values - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("graph Laplacian invariants on random data") {
  mhlr::Rng rng(2);
  const Matrix x = oracles::random_matrix(rng, 25, 3);
  for (auto weighting : {EdgeWeighting::binary, EdgeWeighting::heat}) {
    const RegularizerMatrix lap = graph_laplacian(x, 4, weighting);
    CHECK((lap.values - lap.values.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((lap.values * Vector::Ones(25)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(min_eigenvalue(lap.values) >= -1e-8);
  }
}

TEST_CASE("Laplacian quadratic form equals the brute-force edge sum") {
  mhlr::Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 12 + 4 * trial;
    const Matrix x = oracles::random_matrix(rng, n, 2);
    const Vector f = oracles::random_matrix(rng, n, 1);
    for (auto weighting : {EdgeWeighting::binary, EdgeWeighting::heat}) {
      const RegularizerMatrix lap = graph_laplacian(x, 3, weighting);
      const double direct = f.dot(lap.values * f);
      const double edges = oracles::laplacian_edge_energy(x, 3, weighting, f);
      CHECK(direct == doctest::Approx(edges).epsilon(1e-10));
    }
  }
}

TEST_CASE("identical points make heat weights degenerate") {
  const Matrix x = Matrix::Ones(6, 2);
  CHECK_THROWS_AS(graph_laplacian(x, 2, EdgeWeighting::heat), degenerate_geometry_error);
}

TEST_CASE("local tangent coordinates") {
  mhlr::Rng rng(4);

  SUBCASE("exact 2-D affine data reconstructs with negligible residual") {
    const Matrix latent = oracles::random_matrix(rng, 12, 2);
    Matrix basis = oracles::random_matrix(rng, 5, 2);
    Eigen::HouseholderQR<Matrix> qr(basis);
    basis = qr.householderQ() * Matrix::Identity(5, 2);
    Matrix hood = latent * basis.transpose();
    hood.rowwise() += Eigen::RowVectorXd::Constant(5, 0.7);

    const Matrix coords = local_tangent_coordinates(hood, 2);
    CHECK(coords.rows() == 12);
    CHECK(coords.cols() == 2);
    // centered rows
    CHECK(coords.colwise().sum().cwiseAbs().maxCoeff() <= 1e-9);
    // orthogonal columns
    CHECK(std::abs(coords.col(0).dot(coords.col(1))) <= 1e-9);
    // the coordinates reproduce the centered neighborhood through the basis
    Matrix centered = hood.rowwise() - hood.colwise().mean();
    Eigen::JacobiSVD<Matrix> svd(centered, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Matrix recon = coords * svd.matrixV().leftCols(2).transpose();
    CHECK((centered - recon).cwiseAbs().maxCoeff() <= 1e-10);
  }

  SUBCASE("d = D keeps the full centered geometry") {
    const Matrix hood = oracles::random_matrix(rng, 10, 2);
    const Matrix coords = local_tangent_coordinates(hood, 2);
    const Matrix centered = hood.rowwise() - hood.colwise().mean();
    // same pairwise distances (orthogonal change of basis)
    for (Index i = 0; i < 10; ++i) {
      for (Index j = i + 1; j < 10; ++j) {
        CHECK((coords.row(i) - coords.row(j)).norm() ==
              doctest::Approx((centered.row(i) - centered.row(j)).norm()).epsilon(1e-10));
      }
    }
  }

  SUBCASE("rank below intrinsic_dim is a degenerate-neighborhood error") {
    Matrix line(8, 3);
    for (Index i = 0; i < 8; ++i) line.row(i) = static_cast<double>(i) * Eigen::RowVector3d(1, 2, 3);
    CHECK_THROWS_AS(local_tangent_coordinates(line, 2), degenerate_geometry_error);
  }

  SUBCASE("too few rows for the quadratic fit is rejected") {
    const Matrix hood = oracles::random_matrix(rng, 4, 3);
    CHECK_THROWS_AS(local_tangent_coordinates(hood, 2), validation_error);
  }
}

TEST_CASE("hessian energy matrix basics") {
  mhlr::Rng rng(5);
  const auto pe = generate_planar_embedding(120, 5, 6);
  const Matrix& x = pe.dataset.views[0];
  const RegularizerMatrix reg = hessian_energy_matrix(x, 12, 2);
  const Matrix& b = reg.values;

  SUBCASE("symmetric, PSD, constants in the nullspace") {
    CHECK((b - b.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(min_eigenvalue(b) >= -1e-8);
    const Vector ones = Vector::Ones(120);
    CHECK((b * ones).cwiseAbs().maxCoeff() <= 1e-8);
    const double c_energy = ones.dot(b * ones);
    CHECK(std::abs(c_energy) <= 1e-10 * b.norm() * ones.squaredNorm());
  }

  SUBCASE("nullspace separation: linear functions cost nothing, quadratics do") {
    const Vector f_lin = 0.3 * Vector::Ones(120) + 1.2 * pe.latent.col(0) - 0.7 * pe.latent.col(1);
    const Vector f_quad = pe.latent.col(0).cwiseProduct(pe.latent.col(0));
    const double e_lin = f_lin.dot(b * f_lin);
    const double e_quad = f_quad.dot(b * f_quad);
    CHECK(e_quad > 0.0);
    CHECK(e_lin / e_quad <= 1e-6);

    const RegularizerMatrix lap = graph_laplacian(x, 10, EdgeWeighting::heat);
    const double l_lin = f_lin.dot(lap.values * f_lin);
    const double l_quad = f_quad.dot(lap.values * f_quad);
    CHECK(l_lin / l_quad >= 1e-2);
  }

  SUBCASE("quadratic form matches the least-squares projector oracle") {
    const Vector f_quad = pe.latent.col(0).cwiseProduct(pe.latent.col(0));
    const double direct = f_quad.dot(b * f_quad);
    const double oracle = oracles::hessian_energy_oracle(x, 12, 2, f_quad);
    CHECK(direct == doctest::Approx(oracle).epsilon(1e-8));

    Vector f_rand(120);
    for (Index i = 0; i < 120; ++i) f_rand[i] = rng.normal();
    CHECK(f_rand.dot(b * f_rand) ==
          doctest::Approx(oracles::hessian_energy_oracle(x, 12, 2, f_rand)).epsilon(1e-8));
  }

  SUBCASE("k below the quadratic-fit size is rejected") {
    CHECK_THROWS_AS(hessian_energy_matrix(x, 5, 2), validation_error);
  }
}

TEST_CASE("hessian local operator is invariant to tangent re-basis") {
  mhlr::Rng rng(7);
  const Matrix hood = oracles::random_matrix(rng, 14, 4);
  const Matrix tangent = local_tangent_coordinates(hood, 2);
  const Matrix h0 = local_hessian_operator(tangent);
  const Matrix s0 = h0.transpose() * h0;
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix r = oracles::random_rotation(rng, 2);
    const Matrix h1 = local_hessian_operator(tangent * r);
    const Matrix s1 = h1.transpose() * h1;
    CHECK((s1 - s0).norm() <= 1e-8 * s0.norm());
  }
}

TEST_CASE("hessian energy matrix is invariant to per-neighborhood rotations") {
  mhlr::Rng rng(8);
  const auto pe = generate_planar_embedding(60, 4, 9);
  const Matrix& x = pe.dataset.views[0];
  const Index k = 10, d = 2;
  const Matrix b = hessian_energy_matrix(x, k, d).values;

  // Rebuild with a random rotation applied to every tangent frame.
  const NeighborGraph g = knn_graph(x, k);
  Matrix rebuilt = Matrix::Zero(60, 60);
  for (Index i = 0; i < 60; ++i) {
    std::vector<Index> hood = {i};
    for (Index j : g.neighbors[static_cast<std::size_t>(i)]) hood.push_back(j);
    Matrix local(static_cast<Index>(hood.size()), x.cols());
    for (std::size_t r = 0; r < hood.size(); ++r) local.row(static_cast<Index>(r)) = x.row(hood[r]);
    const Matrix tangent = local_tangent_coordinates(local, d) * oracles::random_rotation(rng, d);
    const Matrix h = local_hessian_operator(tangent);
    const Matrix s = h.transpose() * h;
    for (std::size_t r = 0; r < hood.size(); ++r)
      for (std::size_t c = 0; c < hood.size(); ++c)
        rebuilt(hood[r], hood[c]) += s(static_cast<Index>(r), static_cast<Index>(c));
  }
  CHECK((rebuilt - b).norm() <= 1e-8 * b.norm());
}

TEST_CASE("degenerate geometry fails the hessian builder") {
  Matrix line(30, 3);
  for (Index i = 0; i < 30; ++i) line.row(i) = static_cast<double>(i) * Eigen::RowVector3d(1, 0.5, -1);
  CHECK_THROWS_AS(hessian_energy_matrix(line, 8, 2), degenerate_geometry_error);
}

TEST_CASE("coordinate-list dump writes parsable rows") {
  oracles::TempDir dir("regdump");
  Matrix x(5, 2);
  x << 0, 0, 1, 0, 0, 1, 1, 1, 2, 2;
  const RegularizerMatrix lap = graph_laplacian(x, 2, EdgeWeighting::binary);
  const std::string path = dir.file("lap.txt");
  lap.dump_coordinate_list(path);
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows > 5);
}
