#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "mhlr/kernels.hpp"
#include "oracles.hpp"

using namespace mhlr;

namespace {

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  return es.eigenvalues().minCoeff();
}

}  // namespace

TEST_CASE("linear kernel on orthonormal rows is the identity") {
  Matrix x(2, 2);
  x << 1, 0, 0, 1;
  const GramMatrix g = gram_matrix(x, {KernelKind::linear, 0.0});
  CHECK(g(0, 0) == 1.0);
  CHECK(g(0, 1) == 0.0);
  CHECK(g(1, 0) == 0.0);
  CHECK(g(1, 1) == 1.0);
}

TEST_CASE("rbf diagonal is exactly one and entries stay in (0, 1]") {
  mhlr::Rng rng(2);
  const Matrix x = oracles::random_matrix(rng, 12, 3);
  const GramMatrix g = gram_matrix(x, {KernelKind::rbf, 1.5});
  for (Index i = 0; i < 12; ++i) CHECK(g(i, i) == 1.0);
  CHECK(g.minCoeff() > 0.0);
  CHECK(g.maxCoeff() <= 1.0);
}

TEST_CASE("rbf off-diagonal at distance sqrt(2 ln 2) with unit bandwidth is 0.5") {
  Matrix x(2, 1);
  x << 0.0, std::sqrt(2.0 * std::log(2.0));
  const GramMatrix g = gram_matrix(x, {KernelKind::rbf, 1.0});
  CHECK(g(0, 1) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("gram matrices are exactly symmetric and PSD") {
  mhlr::Rng rng(3);
  for (auto kind : {KernelKind::linear, KernelKind::rbf}) {
    const Matrix x = oracles::random_matrix(rng, 30, 4);
    const KernelSpec spec = resolve_bandwidth({kind, 0.0}, x);
    const GramMatrix g = gram_matrix(x, spec);
    CHECK((g - g.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(min_eigenvalue(g) >= -1e-8);
  }
}

TEST_CASE("non-finite features are rejected") {
  Matrix x(2, 2);
  x << 1, 2, std::nan(""), 4;
  CHECK_THROWS_AS(gram_matrix(x, {KernelKind::linear, 0.0}), validation_error);
}

TEST_CASE("cross kernel") {
  mhlr::Rng rng(4);
  const Matrix train = oracles::random_matrix(rng, 15, 3);

  SUBCASE("restricted to the training set it reproduces the Gram matrix") {
    for (auto kind : {KernelKind::linear, KernelKind::rbf}) {
      const KernelSpec spec = resolve_bandwidth({kind, 0.0}, train);
      const Matrix c = cross_kernel(train, train, spec);
      const GramMatrix g = gram_matrix(train, spec);
      CHECK((c - g).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SUBCASE("rbf query equal to a training row scores exactly one") {
    const Matrix query = train.row(6);
    const Matrix c = cross_kernel(train, query, {KernelKind::rbf, 2.0});
    CHECK(c(0, 6) == 1.0);
  }

  SUBCASE("linear kernel with a zero query row is a zero row") {
    const Matrix query = Matrix::Zero(1, 3);
    const Matrix c = cross_kernel(train, query, {KernelKind::linear, 0.0});
    CHECK(c.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("column mismatch is rejected") {
    const Matrix query = Matrix::Zero(1, 4);
    CHECK_THROWS_AS(cross_kernel(train, query, {KernelKind::linear, 0.0}), validation_error);
  }
}

TEST_CASE("simplex weights enforce nonnegativity and unit sum") {
  CHECK_THROWS_AS((void)SimplexWeights(Vector::Constant(2, 0.4)), validation_error);
  Vector bad(2);
  bad << 1.5, -0.5;
  CHECK_THROWS_AS((void)SimplexWeights(bad), validation_error);
  const SimplexWeights u = SimplexWeights::uniform(4);
  CHECK(u[0] == 0.25);
  CHECK(u.values().sum() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("combine_matrices") {
  Matrix a(2, 2), b(2, 2);
  a << 1, 0, 0, 1;
  b << 1, 1, 1, 1;

  SUBCASE("one-hot weights return that part exactly") {
    const Matrix out = combine_matrices({a, b}, SimplexWeights::one_hot(2, 1));
    CHECK((out - b).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("equal weights average entrywise") {
    const Matrix out = combine_matrices({a, b}, SimplexWeights::uniform(2));
    Matrix expect(2, 2);
    expect << 1, 0.5, 0.5, 1;
    CHECK((out - expect).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("identical parts are a fixed point for any weights") {
    mhlr::Rng rng(5);
    const Vector w = oracles::random_simplex_point(rng, 3);
    const Matrix out = combine_matrices({b, b, b}, SimplexWeights(w));
    CHECK((out - b).cwiseAbs().maxCoeff() <= 1e-15);
  }

  SUBCASE("shape and count mismatches are rejected") {
    CHECK_THROWS_AS(combine_matrices({a, Matrix::Zero(3, 3)}, SimplexWeights::uniform(2)),
                    validation_error);
    CHECK_THROWS_AS(combine_matrices({a, b}, SimplexWeights::uniform(3)), validation_error);
  }
}

TEST_CASE("convex combinations of PSD matrices stay PSD") {
  mhlr::Rng rng(6);
  std::vector<Matrix> grams;
  for (int v = 0; v < 3; ++v) {
    const Matrix x = oracles::random_matrix(rng, 25, 3);
    const KernelSpec spec =
        resolve_bandwidth({v % 2 == 0 ? KernelKind::rbf : KernelKind::linear, 0.0}, x);
    grams.push_back(gram_matrix(x, spec));
  }
  for (int trial = 0; trial < 20; ++trial) {
    const Vector w = oracles::random_simplex_point(rng, 3);
    const Matrix k = combine_matrices(grams, SimplexWeights(w));
    CHECK(min_eigenvalue(k) >= -1e-8);
  }
}

TEST_CASE("median heuristic bandwidth") {
  mhlr::Rng rng(7);
  const Matrix x = oracles::random_matrix(rng, 20, 3);
  const KernelSpec spec = resolve_bandwidth({KernelKind::rbf, 0.0}, x);
  CHECK(spec.bandwidth > 0.0);

  const Matrix identical = Matrix::Ones(5, 2);
  CHECK_THROWS_AS(resolve_bandwidth({KernelKind::rbf, 0.0}, identical),
                  degenerate_geometry_error);

  // An unresolved rbf spec cannot build a Gram matrix.
  CHECK_THROWS_AS(gram_matrix(x, {KernelKind::rbf, 0.0}), validation_error);
}
