#pragma once

#include <algorithm>
#include <cfloat>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "mhlr/dataset.hpp"
#include "mhlr/kernels.hpp"
#include "mhlr/manifold.hpp"
#include "mhlr/optimize.hpp"
#include "mhlr/types.hpp"

namespace mhlr {

enum class Regularizer { none, laplacian, hessian };

enum class ViewMode { single, concatenated, multiview };

inline Regularizer regularizer_from_string(const std::string& s) {
  if (s == "none") return Regularizer::none;
  if (s == "laplacian") return Regularizer::laplacian;
  if (s == "hessian") return Regularizer::hessian;
  throw config_error("unknown regularizer: '" + s + "'");
}

inline std::string to_string(Regularizer r) {
  switch (r) {
    case Regularizer::none: return "none";
    case Regularizer::laplacian: return "laplacian";
    default: return "hessian";
  }
}

/// Everything that defines one cell of the method matrix: which regularizer,
/// which views, which kernels, and the solver hyperparameters.
struct MethodSpec {
  Regularizer regularizer = Regularizer::hessian;
  ViewMode view_mode = ViewMode::multiview;
  Index single_view = 0;
  std::vector<KernelSpec> kernel_specs;  // empty = rbf with median bandwidth
  Index k_hessian = 15;
  Index k_laplacian = 10;
  Index intrinsic_dim = 2;
  EdgeWeighting laplacian_weighting = EdgeWeighting::heat;
  Hyperparams hyper;
};

/// The method family used in the evaluation protocol. "Vis" is view 0,
/// "Tag" view 1.
inline const std::vector<std::string>& method_names() {
  static const std::vector<std::string> names = {"VisF",   "LapVF", "HesVF",
                                                 "TagF",   "LapTag", "HesTag",
                                                 "mCLR",   "mLLR",  "mHLR"};
  return names;
}

/// Builds the MethodSpec for a family name on top of a base configuration
/// (kernels, manifold parameters, hyperparameters are taken from base).
inline MethodSpec method_preset(const std::string& name, MethodSpec base = {}) {
  auto single = [&](Index v, Regularizer r) {
    base.view_mode = ViewMode::single;
    base.single_view = v;
    base.regularizer = r;
    return base;
  };
  if (name == "VisF") return single(0, Regularizer::none);
  if (name == "LapVF") return single(0, Regularizer::laplacian);
  if (name == "HesVF") return single(0, Regularizer::hessian);
  if (name == "TagF") return single(1, Regularizer::none);
  if (name == "LapTag") return single(1, Regularizer::laplacian);
  if (name == "HesTag") return single(1, Regularizer::hessian);
  if (name == "mCLR") {
    base.view_mode = ViewMode::concatenated;
    base.regularizer = Regularizer::none;
    return base;
  }
  if (name == "mLLR") {
    base.view_mode = ViewMode::multiview;
    base.regularizer = Regularizer::laplacian;
    return base;
  }
  if (name == "mHLR") {
    base.view_mode = ViewMode::multiview;
    base.regularizer = Regularizer::hessian;
    return base;
  }
  throw config_error("unknown method name: '" + name + "'");
}

/// Applies the method's view selection: one view, the horizontal
/// concatenation, or all views unchanged.
inline std::vector<Matrix> effective_views(const std::vector<Matrix>& views,
                                           const MethodSpec& method) {
  if (views.empty()) throw validation_error("no views provided");
  switch (method.view_mode) {
    case ViewMode::single: {
      if (method.single_view < 0 || method.single_view >= static_cast<Index>(views.size())) {
        throw validation_error("single_view index " + std::to_string(method.single_view) +
                               " out of range for " + std::to_string(views.size()) + " views");
      }
      return {views[static_cast<std::size_t>(method.single_view)]};
    }
    case ViewMode::concatenated:
      return {concatenate_views(views)};
    default:
      return views;
  }
}

namespace detail {

/// Kernel spec for each effective view; the concatenated mode uses a single
/// spec (the first).
inline std::vector<KernelSpec> effective_kernel_specs(const MethodSpec& method,
                                                      std::size_t effective_count) {
  std::vector<KernelSpec> specs = method.kernel_specs;
  if (specs.empty()) specs.push_back(KernelSpec{});
  if (method.view_mode == ViewMode::concatenated) return {specs.front()};
  if (method.view_mode == ViewMode::single) {
    if (specs.size() == 1) return {specs.front()};
    if (static_cast<Index>(specs.size()) > method.single_view) {
      return {specs[static_cast<std::size_t>(method.single_view)]};
    }
    throw validation_error("no kernel spec for view " + std::to_string(method.single_view));
  }
  if (specs.size() == 1) return std::vector<KernelSpec>(effective_count, specs.front());
  if (specs.size() != effective_count) {
    throw validation_error("kernel spec count " + std::to_string(specs.size()) +
                           " does not match view count " + std::to_string(effective_count));
  }
  return specs;
}

}  // namespace detail

/// Per-view Gram and regularizer matrices shared by all one-vs-rest
/// subproblems, plus the data-resolved kernel specs.
struct TrainingMatrices {
  std::vector<Matrix> grams;
  std::vector<Matrix> regularizers;
  std::vector<KernelSpec> resolved_specs;
};

inline TrainingMatrices build_training_matrices(const std::vector<Matrix>& eff_views,
                                                const MethodSpec& method) {
  TrainingMatrices tm;
  const auto specs = detail::effective_kernel_specs(method, eff_views.size());
  for (std::size_t k = 0; k < eff_views.size(); ++k) {
    const KernelSpec spec = resolve_bandwidth(specs[k], eff_views[k]);
    tm.resolved_specs.push_back(spec);
    tm.grams.push_back(gram_matrix(eff_views[k], spec));
  }
  for (const Matrix& view : eff_views) {
    switch (method.regularizer) {
      case Regularizer::none:
        tm.regularizers.push_back(Matrix::Zero(view.rows(), view.rows()));
        break;
      case Regularizer::laplacian:
        tm.regularizers.push_back(
            graph_laplacian(view, method.k_laplacian, method.laplacian_weighting).values);
        break;
      case Regularizer::hessian:
        tm.regularizers.push_back(
            hessian_energy_matrix(view, method.k_hessian, method.intrinsic_dim).values);
        break;
    }
  }
  return tm;
}

/// One binary scorer: representer coefficients over all training points,
/// learned view weights, and the training feature snapshot the representer
/// sum needs at prediction time.
struct BinaryModel {
  Vector alpha;
  SimplexWeights theta{Vector::Ones(1)};
  SimplexWeights beta{Vector::Ones(1)};
  MethodSpec method;
  std::vector<KernelSpec> resolved_kernels;
  std::vector<Matrix> train_views;  // effective views
  int positive_class = 0;
  std::vector<double> objective_trace;
  bool converged = false;
};

struct MulticlassModel {
  std::vector<BinaryModel> binaries;
  std::vector<int> class_order;
};

namespace detail {

inline ProblemInstance assemble_problem(const TrainingMatrices& tm, const MultiviewDataset& ds,
                                        int positive_class, const MethodSpec& method) {
  ProblemInstance p;
  p.grams = tm.grams;
  p.regularizers = tm.regularizers;
  p.n = ds.n();
  p.hyper = method.hyper;
  if (method.regularizer == Regularizer::none) p.hyper.gamma_I = 0.0;

  for (Index i = 0; i < ds.n(); ++i) {
    if (ds.labeled_mask[static_cast<std::size_t>(i)]) p.labeled_indices.push_back(i);
  }
  p.labels01.resize(static_cast<Index>(p.labeled_indices.size()));
  for (std::size_t i = 0; i < p.labeled_indices.size(); ++i) {
    const int y = ds.labels[static_cast<std::size_t>(p.labeled_indices[i])];
    p.labels01[static_cast<Index>(i)] = y == positive_class ? 1.0 : 0.0;
  }
  return p;
}

inline void require_two_labeled_sides(const MultiviewDataset& ds, int positive_class) {
  Index pos = 0, neg = 0;
  for (std::size_t i = 0; i < ds.labels.size(); ++i) {
    if (!ds.labeled_mask[i]) continue;
    (ds.labels[i] == positive_class ? pos : neg) += 1;
  }
  if (pos < 1) {
    throw validation_error("no labeled example of class " + std::to_string(positive_class));
  }
  if (neg < 1) {
    throw validation_error("labeled set holds only class " + std::to_string(positive_class) +
                           "; a binary problem needs a second class");
  }
}

inline BinaryModel train_binary_on(const TrainingMatrices& tm,
                                   const std::vector<Matrix>& eff_views,
                                   const MultiviewDataset& ds, int positive_class,
                                   const MethodSpec& method) {
  require_two_labeled_sides(ds, positive_class);
  const ProblemInstance problem = assemble_problem(tm, ds, positive_class, method);
  SolverState state = alternate(problem);

  BinaryModel model;
  model.alpha = std::move(state.alpha);
  model.theta = state.theta;
  model.beta = state.beta;
  model.method = method;
  model.resolved_kernels = tm.resolved_specs;
  model.train_views = eff_views;
  model.positive_class = positive_class;
  model.objective_trace = std::move(state.objective_trace);
  model.converged = state.converged;
  return model;
}

}  // namespace detail

/// Trains one binary model: positive_class against the rest, matrices built
/// per the method spec.
inline BinaryModel train_binary(const MultiviewDataset& dataset, int positive_class,
                                const MethodSpec& method) {
  dataset.validate();
  method.hyper.validate();
  const std::vector<Matrix> eff = effective_views(dataset.views, method);
  const TrainingMatrices tm = build_training_matrices(eff, method);
  return detail::train_binary_on(tm, eff, dataset, positive_class, method);
}

/// One binary model per class, sharing the Gram and regularizer matrices,
/// which are built exactly once.
inline MulticlassModel train_one_vs_rest(const MultiviewDataset& dataset,
                                         const MethodSpec& method) {
  dataset.validate();
  method.hyper.validate();
  const std::vector<int> classes = dataset.distinct_classes();
  const std::vector<int> labeled = dataset.distinct_labeled_classes();
  if (labeled.size() < 2) {
    throw validation_error("one-vs-rest training needs >= 2 labeled classes, found " +
                           std::to_string(labeled.size()));
  }
  for (int c : classes) {
    if (!std::binary_search(labeled.begin(), labeled.end(), c)) {
      throw validation_error("class " + std::to_string(c) + " has no labeled example");
    }
  }

  const std::vector<Matrix> eff = effective_views(dataset.views, method);
  const TrainingMatrices tm = build_training_matrices(eff, method);

  MulticlassModel mc;
  mc.class_order = classes;
  for (int c : classes) {
    mc.binaries.push_back(detail::train_binary_on(tm, eff, dataset, c, method));
  }
  return mc;
}

/// Representer-sum decision values f(x) = sum_i alpha_i sum_k theta_k
/// K^k(x_i^k, x^k) for each query row.
inline Vector decision_values(const BinaryModel& model, const std::vector<Matrix>& query_views) {
  const std::vector<Matrix> eff_q = effective_views(query_views, model.method);
  if (eff_q.size() != model.train_views.size()) {
    throw validation_error("query view count does not match the trained model");
  }
  Vector f = Vector::Zero(eff_q.front().rows());
  for (std::size_t k = 0; k < eff_q.size(); ++k) {
    if (eff_q[k].cols() != model.train_views[k].cols()) {
      throw validation_error("query view " + std::to_string(k) + " has " +
                             std::to_string(eff_q[k].cols()) + " columns, trained with " +
                             std::to_string(model.train_views[k].cols()));
    }
    const double w = model.theta[static_cast<Index>(k)];
    if (w == 0.0) continue;
    f += w * (cross_kernel(model.train_views[k], eff_q[k], model.resolved_kernels[k]) * model.alpha);
  }
  return f;
}

/// Sigmoid of the decision values, clamped strictly inside (0, 1).
inline Vector predict_proba(const BinaryModel& model, const std::vector<Matrix>& query_views) {
  Vector p = decision_values(model, query_views);
  for (Index i = 0; i < p.size(); ++i) {
    p[i] = std::clamp(detail::sigmoid(p[i]), DBL_MIN, 1.0 - DBL_EPSILON / 2);
  }
  return p;
}

/// m x C matrix of one-vs-rest probabilities, column order = class_order.
inline Matrix score_matrix(const MulticlassModel& model, const std::vector<Matrix>& query_views) {
  if (model.binaries.empty()) throw validation_error("empty multiclass model");
  Matrix scores;
  for (std::size_t c = 0; c < model.binaries.size(); ++c) {
    const Vector p = predict_proba(model.binaries[c], query_views);
    if (c == 0) scores.resize(p.size(), static_cast<Index>(model.binaries.size()));
    scores.col(static_cast<Index>(c)) = p;
  }
  return scores;
}

/// Argmax class per query row; ties go to the earlier class in class_order.
inline std::vector<int> predict_classes(const MulticlassModel& model,
                                        const std::vector<Matrix>& query_views) {
  const Matrix scores = score_matrix(model, query_views);
  std::vector<int> out(static_cast<std::size_t>(scores.rows()));
  for (Index r = 0; r < scores.rows(); ++r) {
    Index best = 0;
    for (Index c = 1; c < scores.cols(); ++c) {
      if (scores(r, c) > scores(r, best)) best = c;
    }
    out[static_cast<std::size_t>(r)] = model.class_order[static_cast<std::size_t>(best)];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization: little-endian binary container, FNV-1a 64 integrity checksum.
// ---------------------------------------------------------------------------

namespace detail {

constexpr char kModelMagic[8] = {'M', 'H', 'L', 'R', 'M', 'D', 'L', '\n'};
constexpr std::uint32_t kModelVersion = 1;

inline std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t hash = 1469598103934665603ull;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

struct ByteWriter {
  std::string bytes;

  template <typename T>
  void raw(const T& value) {
    static_assert(std::is_trivially_copyable_v<T>);
    const char* p = reinterpret_cast<const char*>(&value);
    bytes.append(p, sizeof(T));
  }
  void u8(std::uint8_t v) { raw(v); }
  void u32(std::uint32_t v) { raw(v); }
  void u64(std::uint64_t v) { raw(v); }
  void i32(std::int32_t v) { raw(v); }
  void f64(double v) { raw(v); }
  void vec(const Vector& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    for (Index i = 0; i < v.size(); ++i) f64(v[i]);
  }
  void mat(const Matrix& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    for (Index r = 0; r < m.rows(); ++r)
      for (Index c = 0; c < m.cols(); ++c) f64(m(r, c));
  }
};

struct ByteReader {
  const std::string& bytes;
  std::size_t at = 0;

  template <typename T>
  T raw() {
    static_assert(std::is_trivially_copyable_v<T>);
    if (at + sizeof(T) > bytes.size()) throw io_error("model file truncated or corrupt");
    T value;
    std::memcpy(&value, bytes.data() + at, sizeof(T));
    at += sizeof(T);
    return value;
  }
  std::uint8_t u8() { return raw<std::uint8_t>(); }
  std::uint32_t u32() { return raw<std::uint32_t>(); }
  std::uint64_t u64() { return raw<std::uint64_t>(); }
  std::int32_t i32() { return raw<std::int32_t>(); }
  double f64() { return raw<double>(); }
  Vector vec() {
    const auto size = u64();
    Vector v(static_cast<Index>(size));
    for (std::uint64_t i = 0; i < size; ++i) v[static_cast<Index>(i)] = f64();
    return v;
  }
  Matrix mat() {
    const auto rows = u64();
    const auto cols = u64();
    Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
    for (std::uint64_t r = 0; r < rows; ++r)
      for (std::uint64_t c = 0; c < cols; ++c)
        m(static_cast<Index>(r), static_cast<Index>(c)) = f64();
    return m;
  }
};

inline void write_binary_payload(ByteWriter& w, const BinaryModel& m) {
  w.i32(m.positive_class);
  w.u8(static_cast<std::uint8_t>(m.method.regularizer));
  w.u8(static_cast<std::uint8_t>(m.method.view_mode));
  w.i32(static_cast<std::int32_t>(m.method.single_view));
  w.i32(static_cast<std::int32_t>(m.method.k_hessian));
  w.i32(static_cast<std::int32_t>(m.method.k_laplacian));
  w.i32(static_cast<std::int32_t>(m.method.intrinsic_dim));
  w.u8(static_cast<std::uint8_t>(m.method.laplacian_weighting));
  const Hyperparams& hp = m.method.hyper;
  w.f64(hp.gamma_K);
  w.f64(hp.gamma_I);
  w.f64(hp.gamma_theta);
  w.f64(hp.gamma_beta);
  w.f64(hp.cg_tol);
  w.i32(hp.cg_max_iter);
  w.f64(hp.outer_tol);
  w.i32(hp.outer_max_iter);
  w.u32(static_cast<std::uint32_t>(m.train_views.size()));
  for (std::size_t k = 0; k < m.train_views.size(); ++k) {
    w.u8(static_cast<std::uint8_t>(m.resolved_kernels[k].kind));
    w.f64(m.resolved_kernels[k].bandwidth);
    w.mat(m.train_views[k]);
  }
  w.vec(m.alpha);
  w.vec(m.theta.values());
  w.vec(m.beta.values());
  w.u64(m.objective_trace.size());
  for (double v : m.objective_trace) w.f64(v);
  w.u8(m.converged ? 1 : 0);
}

inline BinaryModel read_binary_payload(ByteReader& r) {
  BinaryModel m;
  m.positive_class = r.i32();
  m.method.regularizer = static_cast<Regularizer>(r.u8());
  m.method.view_mode = static_cast<ViewMode>(r.u8());
  m.method.single_view = r.i32();
  m.method.k_hessian = r.i32();
  m.method.k_laplacian = r.i32();
  m.method.intrinsic_dim = r.i32();
  m.method.laplacian_weighting = static_cast<EdgeWeighting>(r.u8());
  Hyperparams& hp = m.method.hyper;
  hp.gamma_K = r.f64();
  hp.gamma_I = r.f64();
  hp.gamma_theta = r.f64();
  hp.gamma_beta = r.f64();
  hp.cg_tol = r.f64();
  hp.cg_max_iter = r.i32();
  hp.outer_tol = r.f64();
  hp.outer_max_iter = r.i32();
  const std::uint32_t views = r.u32();
  for (std::uint32_t k = 0; k < views; ++k) {
    KernelSpec spec;
    spec.kind = static_cast<KernelKind>(r.u8());
    spec.bandwidth = r.f64();
    m.resolved_kernels.push_back(spec);
    m.train_views.push_back(r.mat());
  }
  m.method.kernel_specs = m.resolved_kernels;
  m.alpha = r.vec();
  m.theta = SimplexWeights(r.vec());
  m.beta = SimplexWeights(r.vec());
  const std::uint64_t trace_len = r.u64();
  for (std::uint64_t i = 0; i < trace_len; ++i) m.objective_trace.push_back(r.f64());
  m.converged = r.u8() != 0;
  return m;
}

inline void write_container(const std::string& path, std::uint8_t kind,
                            const std::string& payload) {
  ByteWriter w;
  w.bytes.append(kModelMagic, sizeof(kModelMagic));
  w.u32(kModelVersion);
  w.u8(kind);
  w.bytes += payload;
  w.u64(fnv1a(w.bytes));
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot write model file: " + path);
  out.write(w.bytes.data(), static_cast<std::streamsize>(w.bytes.size()));
  if (!out) throw io_error("write failed: " + path);
}

inline std::string read_container(const std::string& path, std::uint8_t expected_kind) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open model file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::size_t header = sizeof(kModelMagic) + sizeof(std::uint32_t) + 1;
  if (bytes.size() < header + sizeof(std::uint64_t)) {
    throw io_error("model file truncated or corrupt: " + path);
  }
  if (std::memcmp(bytes.data(), kModelMagic, sizeof(kModelMagic)) != 0) {
    throw io_error("not a model file: " + path);
  }
  std::uint32_t version;
  std::memcpy(&version, bytes.data() + sizeof(kModelMagic), sizeof(version));
  if (version != kModelVersion) {
    throw io_error("model file version " + std::to_string(version) + " is not supported (expected " +
                   std::to_string(kModelVersion) + "): " + path);
  }
  const std::string body = bytes.substr(0, bytes.size() - sizeof(std::uint64_t));
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - sizeof(std::uint64_t), sizeof(stored));
  if (fnv1a(body) != stored) {
    throw io_error("model file checksum mismatch (corrupt): " + path);
  }
  const std::uint8_t kind = static_cast<std::uint8_t>(bytes[sizeof(kModelMagic) + sizeof(version)]);
  if (kind != expected_kind) {
    throw io_error("model file holds a different model kind: " + path);
  }
  return body.substr(header);
}

}  // namespace detail

inline void save_model(const BinaryModel& model, const std::string& path) {
  detail::ByteWriter w;
  detail::write_binary_payload(w, model);
  detail::write_container(path, 0, w.bytes);
}

inline BinaryModel load_model(const std::string& path) {
  const std::string payload = detail::read_container(path, 0);
  detail::ByteReader r{payload};
  BinaryModel m = detail::read_binary_payload(r);
  if (r.at != payload.size()) throw io_error("model file holds trailing bytes: " + path);
  return m;
}

inline void save_model(const MulticlassModel& model, const std::string& path) {
  detail::ByteWriter w;
  w.u32(static_cast<std::uint32_t>(model.binaries.size()));
  for (int c : model.class_order) w.i32(c);
  for (const BinaryModel& b : model.binaries) detail::write_binary_payload(w, b);
  detail::write_container(path, 1, w.bytes);
}

inline MulticlassModel load_multiclass_model(const std::string& path) {
  const std::string payload = detail::read_container(path, 1);
  detail::ByteReader r{payload};
  MulticlassModel m;
  const std::uint32_t count = r.u32();
  for (std::uint32_t i = 0; i < count; ++i) m.class_order.push_back(r.i32());
  for (std::uint32_t i = 0; i < count; ++i) m.binaries.push_back(detail::read_binary_payload(r));
  if (r.at != payload.size()) throw io_error("model file holds trailing bytes: " + path);
  return m;
}

}  // namespace mhlr
