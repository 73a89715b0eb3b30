#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "mhlr/kernels.hpp"
#include "mhlr/manifold.hpp"
#include "mhlr/model.hpp"
#include "mhlr/types.hpp"

namespace mhlr {

/// Flat dotted-key run configuration: defaults, optional JSON file, then
/// command-line overrides, in that order. Unknown keys are errors.
class RunConfig {
 public:
  struct KeyDoc {
    const char* key;
    nlohmann::json def;
    const char* doc;
  };

  static const std::vector<KeyDoc>& key_docs() {
    static const std::vector<KeyDoc> docs = {
        {"data.train", "", "training dataset manifest (JSON)"},
        {"data.test", "", "test dataset manifest (JSON); eval and sweep"},
        {"method.name", "mHLR", "method family name (VisF, LapVF, HesVF, TagF, LapTag, HesTag, mCLR, mLLR, mHLR)"},
        {"kernel.kind", "rbf", "kernel family: linear or rbf"},
        {"kernel.bandwidth", 0.0, "rbf bandwidth; 0 = median pairwise distance"},
        {"manifold.k_hessian", 15, "neighbors for the Hessian energy estimate"},
        {"manifold.k_laplacian", 10, "neighbors for the graph Laplacian"},
        {"manifold.intrinsic_dim", 2, "intrinsic manifold dimension for the Hessian fit"},
        {"manifold.weighting", "heat", "Laplacian edge weights: binary or heat"},
        {"hyper.gamma_k", 1e-4, "RKHS norm weight (> 0)"},
        {"hyper.gamma_i", 1e-3, "manifold regularization weight (>= 0)"},
        {"hyper.gamma_theta", 0.1, "kernel-weight ridge (> 0)"},
        {"hyper.gamma_beta", 0.1, "regularizer-weight ridge (> 0)"},
        {"hyper.cg_tol", 1e-7, "block-solver objective-change tolerance"},
        {"hyper.cg_max_iter", 500, "block-solver iteration cap"},
        {"hyper.outer_tol", 1e-5, "outer relative objective-change tolerance"},
        {"hyper.outer_max_iter", 100, "outer iteration cap"},
        {"seed", 0, "random seed for masking and generators"},
        {"out", "", "output path (model file or report CSV)"},
        {"sweep.methods", nlohmann::json::array({"VisF", "LapVF", "HesVF", "TagF", "LapTag",
                                                 "HesTag", "mCLR", "mLLR", "mHLR"}),
         "method names swept"},
        {"sweep.fractions", nlohmann::json::array({0.1, 0.3, 0.5, 0.7, 1.0}),
         "labeled fractions swept"},
        {"sweep.seeds", nlohmann::json::array({0, 1, 2}), "mask seeds swept"},
    };
    return docs;
  }

  static nlohmann::json defaults() {
    nlohmann::json j = nlohmann::json::object();
    for (const KeyDoc& d : key_docs()) j[d.key] = d.def;
    return j;
  }

  RunConfig() : values_(defaults()) {}

  /// Loads a flat JSON object file over the defaults.
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    nlohmann::json j;
    try {
      in >> j;
    } catch (const nlohmann::json::exception& e) {
      throw config_error("config file " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw config_error("config file must hold a flat JSON object");
    for (auto& [key, value] : j.items()) set_json(key, value);
  }

  /// Applies --key value pairs; values parse as JSON when possible, else as
  /// plain strings.
  void apply_overrides(const std::vector<std::pair<std::string, std::string>>& overrides) {
    for (const auto& [key, text] : overrides) {
      nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
      if (value.is_discarded()) value = text;
      set_json(key, value);
    }
  }

  void set_json(const std::string& key, const nlohmann::json& value) {
    if (!values_.contains(key)) throw config_error("unknown config key: '" + key + "'");
    values_[key] = value;
  }

  const nlohmann::json& effective() const { return values_; }

  std::string str(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_string()) throw config_error("config key '" + key + "' must be a string");
    return v.get<std::string>();
  }

  double number(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number()) throw config_error("config key '" + key + "' must be a number");
    return v.get<double>();
  }

  long integer(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_number_integer()) throw config_error("config key '" + key + "' must be an integer");
    return v.get<long>();
  }

  std::vector<double> numbers(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_array()) throw config_error("config key '" + key + "' must be an array");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw config_error("config key '" + key + "' must hold numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::uint64_t> seeds(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_array()) throw config_error("config key '" + key + "' must be an array");
    std::vector<std::uint64_t> out;
    for (const auto& e : v) {
      if (!e.is_number_integer()) throw config_error("config key '" + key + "' must hold integers");
      out.push_back(e.get<std::uint64_t>());
    }
    return out;
  }

  std::vector<std::string> strings(const std::string& key) const {
    const auto& v = at(key);
    if (!v.is_array()) throw config_error("config key '" + key + "' must be an array");
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw config_error("config key '" + key + "' must hold strings");
      out.push_back(e.get<std::string>());
    }
    return out;
  }

  Hyperparams to_hyperparams() const {
    Hyperparams hp;
    hp.gamma_K = number("hyper.gamma_k");
    hp.gamma_I = number("hyper.gamma_i");
    hp.gamma_theta = number("hyper.gamma_theta");
    hp.gamma_beta = number("hyper.gamma_beta");
    hp.cg_tol = number("hyper.cg_tol");
    hp.cg_max_iter = static_cast<int>(integer("hyper.cg_max_iter"));
    hp.outer_tol = number("hyper.outer_tol");
    hp.outer_max_iter = static_cast<int>(integer("hyper.outer_max_iter"));
    hp.validate();
    return hp;
  }

  /// Base method spec (kernel, manifold, hyper) without the family choice.
  MethodSpec to_base_method() const {
    MethodSpec m;
    KernelSpec spec;
    spec.kind = kernel_kind_from_string(str("kernel.kind"));
    spec.bandwidth = number("kernel.bandwidth");
    if (spec.bandwidth < 0.0) throw config_error("kernel.bandwidth must be >= 0");
    m.kernel_specs = {spec};
    m.k_hessian = integer("manifold.k_hessian");
    m.k_laplacian = integer("manifold.k_laplacian");
    m.intrinsic_dim = integer("manifold.intrinsic_dim");
    if (m.k_hessian < 1 || m.k_laplacian < 1 || m.intrinsic_dim < 1) {
      throw config_error("manifold neighbor counts and intrinsic_dim must be >= 1");
    }
    m.laplacian_weighting = edge_weighting_from_string(str("manifold.weighting"));
    m.hyper = to_hyperparams();
    return m;
  }

 private:
  const nlohmann::json& at(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw config_error("unknown config key: '" + key + "'");
    return *it;
  }

  nlohmann::json values_;
};

/// Family name of a method spec; non-preset combinations get a descriptive
/// composite name.
inline std::string method_name_of(const MethodSpec& m) {
  for (const std::string& name : method_names()) {
    MethodSpec preset = method_preset(name);
    if (preset.regularizer == m.regularizer && preset.view_mode == m.view_mode &&
        (m.view_mode != ViewMode::single || preset.single_view == m.single_view)) {
      return name;
    }
  }
  std::string out = to_string(m.regularizer);
  if (m.view_mode == ViewMode::single) {
    out += "-single" + std::to_string(m.single_view);
  } else {
    out += m.view_mode == ViewMode::concatenated ? "-concat" : "-multiview";
  }
  return out;
}

}  // namespace mhlr
