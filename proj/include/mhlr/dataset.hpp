#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "mhlr/csv.hpp"
#include "mhlr/random.hpp"
#include "mhlr/types.hpp"

namespace mhlr {

/// A multiview dataset: V feature matrices over the same n examples, integer
/// class labels, and a labeled/unlabeled mask. Labels at unlabeled positions
/// stay in the record as evaluation ground truth; training code must read
/// labels only where the mask is set.
struct MultiviewDataset {
  std::vector<Matrix> views;
  std::vector<int> labels;
  std::vector<std::uint8_t> labeled_mask;  // 1 = labeled
  std::vector<std::string> class_names;    // optional, may be empty

  Index n() const { return views.empty() ? 0 : views.front().rows(); }
  Index view_count() const { return static_cast<Index>(views.size()); }

  Index labeled_count() const {
    return static_cast<Index>(std::count(labeled_mask.begin(), labeled_mask.end(), 1));
  }

  std::vector<int> distinct_classes() const {
    std::set<int> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
  }

  std::vector<int> distinct_labeled_classes() const {
    std::set<int> s;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labeled_mask[i]) s.insert(labels[i]);
    return {s.begin(), s.end()};
  }

  void validate() const {
    if (views.empty()) throw validation_error("dataset needs at least one view");
    const Index rows = views.front().rows();
    if (rows < 1) throw validation_error("dataset needs at least one example");
    for (std::size_t k = 0; k < views.size(); ++k) {
      if (views[k].rows() != rows) {
        throw validation_error("view " + std::to_string(k) + " has " +
                               std::to_string(views[k].rows()) + " rows, expected " +
                               std::to_string(rows));
      }
      for (Index r = 0; r < views[k].rows(); ++r) {
        for (Index c = 0; c < views[k].cols(); ++c) {
          if (!std::isfinite(views[k](r, c))) {
            throw validation_error("non-finite value at view " + std::to_string(k) +
                                   ", row " + std::to_string(r) + ", column " +
                                   std::to_string(c));
          }
        }
      }
    }
    if (static_cast<Index>(labels.size()) != rows) {
      throw validation_error("labels length " + std::to_string(labels.size()) +
                             " does not match row count " + std::to_string(rows));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] < 0) {
        throw validation_error("label at row " + std::to_string(i) +
                               " is negative; class identifiers must be >= 0");
      }
    }
    if (static_cast<Index>(labeled_mask.size()) != rows) {
      throw validation_error("mask length " + std::to_string(labeled_mask.size()) +
                             " does not match row count " + std::to_string(rows));
    }
    const Index l = labeled_count();
    if (l < 1) throw validation_error("dataset needs at least one labeled example");
  }
};

/// File pointers for one dataset on disk. Paths inside a manifest are
/// resolved relative to the manifest file's directory.
struct DatasetManifest {
  std::vector<std::string> view_paths;
  std::string labels_path;
  std::optional<std::string> mask_path;
  std::vector<std::string> class_names;
  std::map<std::string, std::string> metadata;
};

inline DatasetManifest parse_manifest(const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw io_error("cannot open manifest: " + manifest_path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw io_error("manifest " + manifest_path + " is not valid JSON: " + e.what());
  }
  if (!j.is_object()) throw io_error("manifest " + manifest_path + " must be a JSON object");

  DatasetManifest m;
  const std::filesystem::path base = std::filesystem::path(manifest_path).parent_path();
  auto resolve = [&](const std::string& p) { return (base / p).string(); };

  for (auto& [key, value] : j.items()) {
    if (key == "views") {
      for (const auto& v : value) m.view_paths.push_back(resolve(v.get<std::string>()));
    } else if (key == "labels") {
      m.labels_path = resolve(value.get<std::string>());
    } else if (key == "mask") {
      m.mask_path = resolve(value.get<std::string>());
    } else if (key == "class_names") {
      for (const auto& v : value) m.class_names.push_back(v.get<std::string>());
    } else if (key == "metadata") {
      for (auto& [mk, mv] : value.items()) m.metadata[mk] = mv.get<std::string>();
    } else {
      throw io_error("manifest " + manifest_path + " has unknown key '" + key + "'");
    }
  }
  if (m.view_paths.empty()) throw io_error("manifest " + manifest_path + " lists no views");
  if (m.labels_path.empty()) throw io_error("manifest " + manifest_path + " lists no labels file");
  return m;
}

/// Loads and validates a dataset from a JSON manifest.
inline MultiviewDataset load_dataset(const std::string& manifest_path) {
  const DatasetManifest manifest = parse_manifest(manifest_path);

  MultiviewDataset ds;
  for (const auto& path : manifest.view_paths) ds.views.push_back(csv::read_matrix(path));

  const Index n = ds.views.front().rows();
  for (std::size_t k = 0; k < ds.views.size(); ++k) {
    if (ds.views[k].rows() != n) {
      throw validation_error("row-count mismatch: view 0 (" + manifest.view_paths[0] +
                             ") has " + std::to_string(n) + " rows but view " +
                             std::to_string(k) + " (" + manifest.view_paths[k] + ") has " +
                             std::to_string(ds.views[k].rows()));
    }
  }

  for (long v : csv::read_int_column(manifest.labels_path)) ds.labels.push_back(static_cast<int>(v));
  if (static_cast<Index>(ds.labels.size()) != n) {
    throw validation_error("row-count mismatch: views have " + std::to_string(n) +
                           " rows but labels file has " + std::to_string(ds.labels.size()));
  }

  if (manifest.mask_path) {
    for (long v : csv::read_int_column(*manifest.mask_path)) {
      if (v != 0 && v != 1) {
        throw validation_error("mask entries must be 0 or 1, got " + std::to_string(v));
      }
      ds.labeled_mask.push_back(static_cast<std::uint8_t>(v));
    }
    if (static_cast<Index>(ds.labeled_mask.size()) != n) {
      throw validation_error("row-count mismatch: views have " + std::to_string(n) +
                             " rows but mask file has " + std::to_string(ds.labeled_mask.size()));
    }
  } else {
    ds.labeled_mask.assign(static_cast<std::size_t>(n), 1);
  }

  ds.class_names = manifest.class_names;
  ds.validate();
  return ds;
}

/// Writes a dataset's CSV files plus a manifest named manifest.json into dir.
/// Extra metadata entries become file references in the manifest verbatim.
inline std::string save_dataset(const MultiviewDataset& ds, const std::string& dir,
                                const std::map<std::string, std::string>& metadata = {}) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);

  nlohmann::json manifest;
  manifest["views"] = nlohmann::json::array();
  for (std::size_t k = 0; k < ds.views.size(); ++k) {
    std::string name = "view" + std::to_string(k) + ".csv";
    csv::write_matrix((fs::path(dir) / name).string(), ds.views[k]);
    manifest["views"].push_back(name);
  }
  std::vector<long> labels(ds.labels.begin(), ds.labels.end());
  csv::write_int_column((fs::path(dir) / "labels.csv").string(), labels);
  manifest["labels"] = "labels.csv";

  const bool all_labeled =
      std::all_of(ds.labeled_mask.begin(), ds.labeled_mask.end(), [](auto m) { return m == 1; });
  if (!all_labeled) {
    std::vector<long> mask(ds.labeled_mask.begin(), ds.labeled_mask.end());
    csv::write_int_column((fs::path(dir) / "mask.csv").string(), mask);
    manifest["mask"] = "mask.csv";
  }
  if (!ds.class_names.empty()) manifest["class_names"] = ds.class_names;
  if (!metadata.empty()) manifest["metadata"] = metadata;

  const std::string manifest_path = (fs::path(dir) / "manifest.json").string();
  std::ofstream out(manifest_path);
  if (!out) throw io_error("cannot write manifest: " + manifest_path);
  out << manifest.dump(2) << '\n';
  return manifest_path;
}

namespace detail {

/// Splits a labeled-example budget across classes: largest-remainder shares,
/// then adjusted so every class gets at least 1 and at most its size.
inline std::map<int, Index> stratified_quotas(const std::vector<int>& classes,
                                              const std::map<int, Index>& counts,
                                              Index total, Index budget) {
  std::map<int, Index> quota;
  Index assigned = 0;
  std::vector<std::pair<Index, int>> remainders;  // (remainder, class)
  for (int c : classes) {
    const Index share = budget * counts.at(c);
    quota[c] = share / total;
    assigned += quota[c];
    remainders.emplace_back(share % total, c);
  }
  std::sort(remainders.begin(), remainders.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return a.second < b.second;
  });
  for (const auto& [rem, c] : remainders) {
    if (assigned >= budget) break;
    ++quota[c];
    ++assigned;
  }
  // Enforce 1 <= quota_c <= count_c, moving surplus between classes.
  auto donor = [&](bool need_above_one) -> int {
    int best = -1;
    for (int c : classes) {
      Index floor_c = need_above_one ? 2 : 1;
      if (quota[c] >= floor_c && (best < 0 || quota[c] > quota[best])) best = c;
    }
    return best;
  };
  for (int c : classes) {
    while (quota[c] > counts.at(c)) {
      --quota[c];
      int r = -1;
      for (int d : classes) {
        if (quota[d] < counts.at(d) && (r < 0 || counts.at(d) - quota[d] > counts.at(r) - quota[r])) r = d;
      }
      if (r < 0) throw validation_error("labeled budget exceeds dataset size");
      ++quota[r];
    }
  }
  for (int c : classes) {
    while (quota[c] < 1) {
      int d = donor(true);
      if (d < 0) {
        throw validation_error("fraction yields zero labeled examples for class " +
                               std::to_string(c));
      }
      --quota[d];
      ++quota[c];
    }
  }
  return quota;
}

}  // namespace detail

/// Returns a copy whose labeled mask marks round(fraction * n) examples,
/// stratified so every class keeps at least one labeled example.
/// Deterministic in the seed.
inline MultiviewDataset mask_labeled_fraction(const MultiviewDataset& dataset, double fraction,
                                              std::uint64_t seed) {
  dataset.validate();
  if (!(fraction > 0.0) || fraction > 1.0) {
    throw validation_error("fraction must lie in (0, 1], got " + std::to_string(fraction));
  }
  const Index n = dataset.n();
  const Index budget = static_cast<Index>(std::llround(fraction * static_cast<double>(n)));

  std::map<int, std::vector<Index>> by_class;
  for (Index i = 0; i < n; ++i) by_class[dataset.labels[static_cast<std::size_t>(i)]].push_back(i);
  std::vector<int> classes;
  std::map<int, Index> counts;
  for (const auto& [c, idx] : by_class) {
    classes.push_back(c);
    counts[c] = static_cast<Index>(idx.size());
  }
  if (budget < static_cast<Index>(classes.size())) {
    throw validation_error("fraction " + std::to_string(fraction) + " yields " +
                           std::to_string(budget) + " labeled examples, fewer than the " +
                           std::to_string(classes.size()) + " classes present");
  }

  const auto quota = detail::stratified_quotas(classes, counts, n, budget);

  MultiviewDataset out = dataset;
  out.labeled_mask.assign(static_cast<std::size_t>(n), 0);
  Rng rng(seed);
  for (int c : classes) {
    std::vector<Index> idx = by_class[c];  // ascending by construction
    rng.shuffle(idx);
    for (Index t = 0; t < quota.at(c); ++t) {
      out.labeled_mask[static_cast<std::size_t>(idx[static_cast<std::size_t>(t)])] = 1;
    }
  }
  return out;
}

/// Two interleaving crescent arms, as two views: view 0 holds the noisy 2-D
/// coordinates, view 1 a degree-2 monomial lift [x, y, x^2, xy, y^2] of the
/// noise-free coordinates with independent noise. Classes are balanced n/2.
/// The arms sweep just over a full turn with a growing radius, so at the
/// default noise levels the labeled subset undersamples each arm while the
/// arm geometry itself stays cleanly separated.
inline MultiviewDataset generate_two_moons_multiview(Index n, double noise, std::uint64_t seed) {
  if (n < 4 || n % 2 != 0) {
    throw validation_error("two-moons generator needs an even n >= 4, got " + std::to_string(n));
  }
  if (!(noise >= 0.0)) throw validation_error("noise must be >= 0");

  const Index half = n / 2;
  // Arm sweep, radial growth per radian, and the shared center. The growth
  // keeps opposite arms ~1.1 units apart everywhere along the winding.
  constexpr double kSpan = 2.05 * M_PI;
  constexpr double kGrowth = 0.35;
  constexpr double kCenterX = 1.0;
  constexpr double kCenterY = 0.5;
  Matrix coords(n, 2);
  MultiviewDataset ds;
  ds.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < half; ++i) {
    const double t = kSpan * static_cast<double>(i) / static_cast<double>(half - 1);
    const double r = 1.0 + kGrowth * t;
    coords(i, 0) = kCenterX + r * std::cos(t);
    coords(i, 1) = kCenterY + r * std::sin(t);
    ds.labels[static_cast<std::size_t>(i)] = 0;
    coords(half + i, 0) = kCenterX - r * std::cos(t);
    coords(half + i, 1) = kCenterY - r * std::sin(t);
    ds.labels[static_cast<std::size_t>(half + i)] = 1;
  }

  Matrix lift(n, 5);
  for (Index i = 0; i < n; ++i) {
    const double x = coords(i, 0), y = coords(i, 1);
    lift(i, 0) = x;
    lift(i, 1) = y;
    lift(i, 2) = x * x;
    lift(i, 3) = x * y;
    lift(i, 4) = y * y;
  }

  Rng rng(seed);
  Matrix view0 = coords;
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < 2; ++c) view0(i, c) += noise * rng.normal();
  Matrix view1 = lift;
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < 5; ++c) view1(i, c) += noise * rng.normal();

  ds.views = {std::move(view0), std::move(view1)};
  ds.labeled_mask.assign(static_cast<std::size_t>(n), 1);
  ds.class_names = {"moon0", "moon1"};
  ds.validate();
  return ds;
}

/// Planar-embedding sample plus its 2-D latent coordinates (kept for tests
/// that probe function behavior along the plane).
struct PlanarEmbedding {
  MultiviewDataset dataset;
  Matrix latent;  // n x 2
};

/// n points drawn uniformly from a random 2-D affine subspace of
/// R^ambient_dim, noise-free. Labels are the sign of the first latent
/// coordinate (two classes, for protocol plumbing only).
inline PlanarEmbedding generate_planar_embedding(Index n, Index ambient_dim, std::uint64_t seed) {
  if (ambient_dim < 3) {
    throw validation_error("planar embedding needs ambient_dim >= 3, got " +
                           std::to_string(ambient_dim));
  }
  if (n < 1) throw validation_error("planar embedding needs n >= 1");

  Rng rng(seed);
  Matrix basis_seed(ambient_dim, 2);
  for (Index r = 0; r < ambient_dim; ++r)
    for (Index c = 0; c < 2; ++c) basis_seed(r, c) = rng.normal();
  // Orthonormalize the two spanning directions.
  Vector b0 = basis_seed.col(0);
  b0.normalize();
  Vector b1 = basis_seed.col(1) - b0.dot(basis_seed.col(1)) * b0;
  b1.normalize();
  Vector origin(ambient_dim);
  for (Index r = 0; r < ambient_dim; ++r) origin[r] = rng.normal();

  Matrix latent(n, 2);
  for (Index i = 0; i < n; ++i) {
    latent(i, 0) = 2.0 * rng.uniform() - 1.0;
    latent(i, 1) = 2.0 * rng.uniform() - 1.0;
  }

  Matrix points(n, ambient_dim);
  for (Index i = 0; i < n; ++i) {
    points.row(i) = (origin + latent(i, 0) * b0 + latent(i, 1) * b1).transpose();
  }

  PlanarEmbedding out;
  out.dataset.views = {std::move(points)};
  out.dataset.labels.resize(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    out.dataset.labels[static_cast<std::size_t>(i)] = latent(i, 0) >= 0.0 ? 1 : 0;
  }
  out.dataset.labeled_mask.assign(static_cast<std::size_t>(n), 1);
  out.latent = std::move(latent);
  out.dataset.validate();
  return out;
}

/// Horizontal concatenation of all views into a single feature matrix.
inline Matrix concatenate_views(const std::vector<Matrix>& views) {
  if (views.empty()) throw validation_error("no views to concatenate");
  Index cols = 0;
  for (const Matrix& v : views) cols += v.cols();
  Matrix out(views.front().rows(), cols);
  Index at = 0;
  for (const Matrix& v : views) {
    out.middleCols(at, v.cols()) = v;
    at += v.cols();
  }
  return out;
}

}  // namespace mhlr
