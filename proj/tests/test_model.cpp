#include <doctest.h>

#include <fstream>

#include "mhlr/dataset.hpp"
#include "mhlr/eval.hpp"
#include "mhlr/model.hpp"
#include "oracles.hpp"

using namespace mhlr;

namespace {

MethodSpec quick_method(Regularizer reg, ViewMode mode, Index view = 0) {
  MethodSpec m;
  m.regularizer = reg;
  m.view_mode = mode;
  m.single_view = view;
  m.k_hessian = 10;
  m.k_laplacian = 8;
  return m;
}

/// Three well-separated Gaussian blobs in 2-D, all labeled.
MultiviewDataset three_blobs(Index per_class, std::uint64_t seed) {
  mhlr::Rng rng(seed);
  MultiviewDataset ds;
  Matrix x(3 * per_class, 2);
  const double centers[3][2] = {{0.0, 0.0}, {6.0, 0.0}, {0.0, 6.0}};
  for (Index c = 0; c < 3; ++c) {
    for (Index i = 0; i < per_class; ++i) {
      x(c * per_class + i, 0) = centers[c][0] + 0.5 * rng.normal();
      x(c * per_class + i, 1) = centers[c][1] + 0.5 * rng.normal();
      ds.labels.push_back(static_cast<int>(c));
    }
  }
  ds.views = {std::move(x)};
  ds.labeled_mask.assign(static_cast<std::size_t>(3 * per_class), 1);
  return ds;
}

BinaryModel hand_model(const std::vector<Matrix>& views, const Vector& alpha) {
  BinaryModel m;
  m.alpha = alpha;
  m.theta = SimplexWeights::uniform(static_cast<Index>(views.size()));
  m.beta = SimplexWeights::uniform(static_cast<Index>(views.size()));
  m.method.view_mode = ViewMode::multiview;
  m.method.regularizer = Regularizer::none;
  m.resolved_kernels.assign(views.size(), KernelSpec{KernelKind::linear, 0.0});
  m.train_views = views;
  m.positive_class = 1;
  return m;
}

}  // namespace

TEST_CASE("mCLR is single-view training on the concatenated matrix") {
  const auto ds = mask_labeled_fraction(generate_two_moons_multiview(60, 0.15, 4), 0.5, 4);
  const BinaryModel a = train_binary(ds, 1, quick_method(Regularizer::none, ViewMode::concatenated));

  MultiviewDataset joined = ds;
  joined.views = {concatenate_views(ds.views)};
  const BinaryModel b = train_binary(joined, 1, quick_method(Regularizer::none, ViewMode::single));

  CHECK((a.alpha - b.alpha).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.resolved_kernels[0].bandwidth == b.resolved_kernels[0].bandwidth);
}

TEST_CASE("multiview with one view collapses to single-view training") {
  const auto pe = generate_planar_embedding(50, 4, 2);
  auto ds = mask_labeled_fraction(pe.dataset, 0.5, 2);
  const BinaryModel a = train_binary(ds, 1, quick_method(Regularizer::hessian, ViewMode::multiview));
  const BinaryModel b = train_binary(ds, 1, quick_method(Regularizer::hessian, ViewMode::single));
  CHECK((a.alpha - b.alpha).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.theta.size() == 1);
}

TEST_CASE("with gamma_I = 0 the regularizer choice cannot matter") {
  auto ds = mask_labeled_fraction(generate_two_moons_multiview(50, 0.2, 5), 0.5, 5);
  MethodSpec none = quick_method(Regularizer::none, ViewMode::multiview);
  MethodSpec lap = quick_method(Regularizer::laplacian, ViewMode::multiview);
  MethodSpec hes = quick_method(Regularizer::hessian, ViewMode::multiview);
  lap.hyper.gamma_I = 0.0;
  hes.hyper.gamma_I = 0.0;

  const BinaryModel m_none = train_binary(ds, 1, none);
  const BinaryModel m_lap = train_binary(ds, 1, lap);
  const BinaryModel m_hes = train_binary(ds, 1, hes);
  CHECK((m_none.alpha - m_lap.alpha).cwiseAbs().maxCoeff() == 0.0);
  CHECK((m_none.alpha - m_hes.alpha).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hessian regularization does not hurt two-moons at 10% labels") {
  // Paired runs; ties over seeds broken by the mean.
  const Index n = 120;
  double acc_hessian = 0.0, acc_plain = 0.0;
  for (std::uint64_t seed = 7; seed < 12; ++seed) {
    const auto train = mask_labeled_fraction(generate_two_moons_multiview(n, 0.1, seed), 0.1, seed);
    const auto test = generate_two_moons_multiview(n, 0.1, seed + 1000);
    MethodSpec hes = quick_method(Regularizer::hessian, ViewMode::multiview);
    hes.intrinsic_dim = 1;  // the moon arms are curves
    MethodSpec none = quick_method(Regularizer::none, ViewMode::multiview);
    for (const auto* pair : {&hes, &none}) {
      const MulticlassModel model = train_one_vs_rest(train, *pair);
      const std::vector<int> pred = predict_classes(model, test.views);
      Index correct = 0;
      for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == test.labels[i]) ++correct;
      }
      (pair == &hes ? acc_hessian : acc_plain) +=
          static_cast<double>(correct) / static_cast<double>(n) / 5.0;
    }
  }
  CHECK(acc_hessian >= acc_plain - 1e-12);
}

TEST_CASE("one-vs-rest training") {
  auto ds = three_blobs(20, 6);

  SUBCASE("one binary per class, matrices built once") {
    const long grams_before = detail::gram_build_calls.load();
    const MulticlassModel model = train_one_vs_rest(ds, quick_method(Regularizer::none, ViewMode::multiview));
    const long grams_after = detail::gram_build_calls.load();
    CHECK(grams_after - grams_before == 1);  // once per view, shared across classes

    REQUIRE(model.binaries.size() == 3);
    CHECK(model.class_order == std::vector<int>{0, 1, 2});
    // Independent problems: scores of different binaries are not mirrored.
    const Vector f0 = decision_values(model.binaries[0], ds.views);
    const Vector f1 = decision_values(model.binaries[1], ds.views);
    CHECK((f0 + f1).cwiseAbs().maxCoeff() > 1e-9);
  }

  SUBCASE("a class with no labeled example is named in the error") {
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
      if (ds.labels[i] == 2) ds.labeled_mask[i] = 0;
    }
    CHECK_THROWS_WITH_AS(train_one_vs_rest(ds, quick_method(Regularizer::none, ViewMode::multiview)),
                         doctest::Contains("class 2"), validation_error);
  }

  SUBCASE("fewer than two labeled classes is rejected") {
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
      if (ds.labels[i] != 0) ds.labeled_mask[i] = 0;
    }
    CHECK_THROWS_AS(train_one_vs_rest(ds, quick_method(Regularizer::none, ViewMode::multiview)),
                    validation_error);
  }

  SUBCASE("binary training needs labeled examples on both sides") {
    for (std::size_t i = 0; i < ds.labels.size(); ++i) {
      if (ds.labels[i] != 1) ds.labeled_mask[i] = 0;
    }
    CHECK_THROWS_AS(train_binary(ds, 1, quick_method(Regularizer::none, ViewMode::multiview)),
                    validation_error);
  }
}

TEST_CASE("decision values") {
  mhlr::Rng rng(20);
  const Matrix x0 = oracles::random_matrix(rng, 10, 3);
  const Matrix x1 = oracles::random_matrix(rng, 10, 2);

  SUBCASE("zero alpha scores zero everywhere") {
    const BinaryModel m = hand_model({x0, x1}, Vector::Zero(10));
    CHECK(decision_values(m, {x0, x1}).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("on the training set the values equal K alpha") {
    const Vector alpha = oracles::random_matrix(rng, 10, 1);
    const BinaryModel m = hand_model({x0, x1}, alpha);
    const Matrix k = 0.5 * gram_matrix(x0, m.resolved_kernels[0]) +
                     0.5 * gram_matrix(x1, m.resolved_kernels[1]);
    const Vector expect = k * alpha;
    const Vector got = decision_values(m, {x0, x1});
    CHECK((got - expect).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("a single query equal to training point j scores the representer sum") {
    const Vector alpha = oracles::random_matrix(rng, 10, 1);
    const BinaryModel m = hand_model({x0, x1}, alpha);
    const Index j = 4;
    const std::vector<Matrix> query = {x0.row(j), x1.row(j)};
    const double got = decision_values(m, query)[0];
    double expect = 0.0;
    for (Index i = 0; i < 10; ++i) {
      expect += alpha[i] * (0.5 * x0.row(j).dot(x0.row(i)) + 0.5 * x1.row(j).dot(x1.row(i)));
    }
    CHECK(got == doctest::Approx(expect).epsilon(1e-12));
  }

  SUBCASE("dimension mismatches are rejected") {
    const BinaryModel m = hand_model({x0, x1}, Vector::Zero(10));
    CHECK_THROWS_AS(decision_values(m, {x0}), validation_error);
    CHECK_THROWS_AS(decision_values(m, {x1, x0}), validation_error);
  }
}

TEST_CASE("predicted probabilities") {
  mhlr::Rng rng(21);
  const Matrix x = oracles::random_matrix(rng, 8, 2);

  SUBCASE("zero decision maps to one half") {
    const BinaryModel m = hand_model({x}, Vector::Zero(8));
    const Vector p = predict_proba(m, {x});
    for (Index i = 0; i < p.size(); ++i) CHECK(p[i] == 0.5);
  }

  SUBCASE("probability is monotone in the decision value") {
    const Vector alpha = oracles::random_matrix(rng, 8, 1);
    const BinaryModel m = hand_model({x}, alpha);
    const Vector f = decision_values(m, {x});
    const Vector p = predict_proba(m, {x});
    for (Index i = 0; i < 8; ++i) {
      for (Index j = 0; j < 8; ++j) {
        if (f[i] > f[j]) CHECK(p[i] > p[j]);
      }
    }
  }

  SUBCASE("sigma(f) + sigma(-f) = 1 and values stay strictly inside (0, 1)") {
    const Vector alpha = 1e4 * oracles::random_matrix(rng, 8, 1);  // saturating decisions
    const BinaryModel pos = hand_model({x}, alpha);
    const BinaryModel neg = hand_model({x}, Vector(-alpha));
    const Vector p = predict_proba(pos, {x});
    const Vector q = predict_proba(neg, {x});
    for (Index i = 0; i < 8; ++i) {
      CHECK(p[i] > 0.0);
      CHECK(p[i] < 1.0);
      CHECK(std::abs(p[i] + q[i] - 1.0) <= 1e-15);
    }
  }
}

TEST_CASE("model serialization") {
  oracles::TempDir dir("model");
  auto ds = mask_labeled_fraction(generate_two_moons_multiview(40, 0.15, 8), 0.5, 8);
  const BinaryModel model = train_binary(ds, 1, quick_method(Regularizer::hessian, ViewMode::multiview));
  const std::string path = dir.file("model.mhlr");

  SUBCASE("round-trip preserves predictions bitwise") {
    save_model(model, path);
    const BinaryModel back = load_model(path);
    const auto probe = generate_two_moons_multiview(20, 0.3, 99);
    const Vector f0 = decision_values(model, probe.views);
    const Vector f1 = decision_values(back, probe.views);
    CHECK((f0 - f1).cwiseAbs().maxCoeff() == 0.0);
    CHECK(back.positive_class == model.positive_class);
    CHECK(back.converged == model.converged);
    CHECK(back.objective_trace == model.objective_trace);
  }

  SUBCASE("truncation is detected") {
    save_model(model, path);
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() - 12));
    out.close();
    CHECK_THROWS_AS(load_model(path), io_error);
  }

  SUBCASE("a corrupted byte fails the checksum") {
    save_model(model, path);
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x40);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("checksum"), io_error);
  }

  SUBCASE("a bumped version field is a version mismatch") {
    save_model(model, path);
    std::ifstream in(path, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    bytes[8] = static_cast<char>(bytes[8] + 1);  // version lives after the magic
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    CHECK_THROWS_WITH_AS(load_model(path), doctest::Contains("version"), io_error);
  }

  SUBCASE("multiclass container round-trips bitwise") {
    const MulticlassModel mc = train_one_vs_rest(ds, quick_method(Regularizer::none, ViewMode::multiview));
    save_model(mc, path);
    const MulticlassModel back = load_multiclass_model(path);
    CHECK(back.class_order == mc.class_order);
    const auto probe = generate_two_moons_multiview(20, 0.3, 98);
    const Matrix s0 = score_matrix(mc, probe.views);
    const Matrix s1 = score_matrix(back, probe.views);
    CHECK((s0 - s1).cwiseAbs().maxCoeff() == 0.0);
    // kind mismatch: a multiclass file does not load as a binary model
    CHECK_THROWS_AS(load_model(path), io_error);
  }
}

TEST_CASE("method presets cover the full method family") {
  CHECK(method_preset("VisF").view_mode == ViewMode::single);
  CHECK(method_preset("VisF").regularizer == Regularizer::none);
  CHECK(method_preset("TagF").single_view == 1);
  CHECK(method_preset("HesTag").regularizer == Regularizer::hessian);
  CHECK(method_preset("mCLR").view_mode == ViewMode::concatenated);
  CHECK(method_preset("mLLR").regularizer == Regularizer::laplacian);
  CHECK(method_preset("mHLR").view_mode == ViewMode::multiview);
  CHECK(method_preset("mHLR").regularizer == Regularizer::hessian);
  CHECK_THROWS_AS(method_preset("nope"), config_error);
  CHECK(method_names().size() == 9);
}
