// Command-line front end: dataset generation, training, evaluation, and the
// labeled-fraction sweep protocol. Exit codes: 0 success, 1 runtime/data
// error, 2 configuration error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mhlr/config.hpp"
#include "mhlr/csv.hpp"
#include "mhlr/dataset.hpp"
#include "mhlr/eval.hpp"
#include "mhlr/model.hpp"

namespace {

using nlohmann::json;

std::vector<std::pair<std::string, std::string>> pair_up_overrides(
    const std::vector<std::string>& extras) {
  std::vector<std::pair<std::string, std::string>> overrides;
  for (std::size_t i = 0; i < extras.size(); ++i) {
    std::string key = extras[i];
    if (key.rfind("--", 0) != 0) {
      throw mhlr::config_error("expected '--key value' override, got '" + key + "'");
    }
    key = key.substr(2);
    if (i + 1 >= extras.size()) {
      throw mhlr::config_error("override '--" + key + "' is missing a value");
    }
    overrides.emplace_back(key, extras[++i]);
  }
  return overrides;
}

mhlr::RunConfig make_config(const std::string& config_path,
                            const std::vector<std::string>& extras) {
  mhlr::RunConfig cfg;
  if (!config_path.empty()) cfg.load_file(config_path);
  cfg.apply_overrides(pair_up_overrides(extras));
  return cfg;
}

json weights_to_json(const mhlr::SimplexWeights& w) {
  json arr = json::array();
  for (mhlr::Index i = 0; i < w.size(); ++i) arr.push_back(w[i]);
  return arr;
}

int cmd_gen(const std::string& kind, long n, double noise, long ambient_dim,
            std::uint64_t seed, const std::string& out_dir) {
  if (out_dir.empty()) throw mhlr::config_error("gen needs --out <dir>");
  std::string manifest;
  if (kind == "two-moons") {
    const auto ds = mhlr::generate_two_moons_multiview(n, noise, seed);
    manifest = mhlr::save_dataset(ds, out_dir, {{"kind", "two-moons"}});
  } else if (kind == "planar") {
    const auto pe = mhlr::generate_planar_embedding(n, ambient_dim, seed);
    manifest = mhlr::save_dataset(pe.dataset, out_dir,
                                  {{"kind", "planar"}, {"latent", "latent.csv"}});
    mhlr::csv::write_matrix((std::filesystem::path(out_dir) / "latent.csv").string(), pe.latent);
  } else {
    throw mhlr::config_error("unknown generator kind: '" + kind +
                             "' (expected two-moons or planar)");
  }
  mhlr::load_dataset(manifest);  // round-trip check
  std::cout << manifest << '\n';
  return 0;
}

int cmd_train(const mhlr::RunConfig& cfg) {
  const std::string train_path = cfg.str("data.train");
  if (train_path.empty()) throw mhlr::config_error("train needs data.train");
  std::string out = cfg.str("out");
  if (out.empty()) out = "model.mhlr";

  const mhlr::MultiviewDataset ds = mhlr::load_dataset(train_path);
  const mhlr::MethodSpec method = mhlr::method_preset(cfg.str("method.name"), cfg.to_base_method());
  const mhlr::MulticlassModel model = mhlr::train_one_vs_rest(ds, method);
  mhlr::save_model(model, out);

  json log;
  log["config"] = cfg.effective();
  log["method"] = cfg.str("method.name");
  log["binaries"] = json::array();
  for (const mhlr::BinaryModel& b : model.binaries) {
    json entry;
    entry["class"] = b.positive_class;
    entry["converged"] = b.converged;
    entry["theta"] = weights_to_json(b.theta);
    entry["beta"] = weights_to_json(b.beta);
    entry["objective_trace"] = b.objective_trace;
    log["binaries"].push_back(entry);
  }
  const std::string log_path = out + ".log.json";
  std::ofstream log_out(log_path);
  if (!log_out) throw mhlr::io_error("cannot write log: " + log_path);
  log_out << log.dump(2) << '\n';

  std::cout << "model: " << out << "\nlog: " << log_path << '\n';
  return 0;
}

int cmd_eval(const std::string& model_path, const std::string& data_path,
             const std::string& out_csv) {
  const mhlr::MulticlassModel model = mhlr::load_multiclass_model(model_path);
  const mhlr::MultiviewDataset data = mhlr::load_dataset(data_path);
  mhlr::EvalReport report = mhlr::evaluate_model(model, data);
  report.method = mhlr::method_name_of(model.binaries.front().method);
  mhlr::write_report_csv({report}, out_csv);
  std::cout << "map: " << report.map << "\naccuracy: " << report.accuracy
            << "\nreport: " << out_csv << '\n';
  return 0;
}

int cmd_sweep(const mhlr::RunConfig& cfg) {
  const std::string train_path = cfg.str("data.train");
  const std::string test_path = cfg.str("data.test");
  if (train_path.empty() || test_path.empty()) {
    throw mhlr::config_error("sweep needs data.train and data.test");
  }
  std::string out = cfg.str("out");
  if (out.empty()) out = "report.csv";

  const mhlr::MultiviewDataset train = mhlr::load_dataset(train_path);
  const mhlr::MultiviewDataset test = mhlr::load_dataset(test_path);

  std::vector<mhlr::NamedMethod> methods;
  for (const std::string& name : cfg.strings("sweep.methods")) {
    methods.push_back({name, mhlr::method_preset(name, cfg.to_base_method())});
  }
  const auto reports = mhlr::fraction_sweep(train, test, methods, cfg.numbers("sweep.fractions"),
                                            cfg.seeds("sweep.seeds"));
  mhlr::write_report_csv(reports, out);
  std::cout << "report: " << out << " (" << reports.size() << " cells)\n";
  return 0;
}

int cmd_config() {
  for (const auto& d : mhlr::RunConfig::key_docs()) {
    std::cout << d.key << " = " << d.def.dump() << "\n    " << d.doc << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiview Hessian-regularized logistic regression toolkit"};
  app.require_subcommand(1);

  auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
  std::string gen_kind;
  long gen_n = 200;
  double gen_noise = 0.1;
  long gen_ambient = 5;
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  gen->add_option("kind", gen_kind, "two-moons or planar")->required();
  gen->add_option("--n", gen_n, "number of examples");
  gen->add_option("--noise", gen_noise, "Gaussian noise level (two-moons)");
  gen->add_option("--ambient-dim", gen_ambient, "ambient dimension (planar)");
  gen->add_option("--seed", gen_seed, "random seed");
  gen->add_option("--out", gen_out, "output directory")->required();

  std::string train_config, sweep_config;
  std::uint64_t cli_seed = 0;
  bool seed_given = false;
  std::string cli_out;

  auto* train = app.add_subcommand("train", "train a one-vs-rest model");
  train->allow_extras();
  train->add_option("--config", train_config, "JSON config file");
  train->add_option("--seed", cli_seed, "seed override")->each([&](const std::string&) { seed_given = true; });
  train->add_option("--out", cli_out, "model output path");

  auto* eval = app.add_subcommand("eval", "score a model on a dataset");
  std::string eval_model, eval_data, eval_out = "report.csv";
  eval->add_option("--model", eval_model, "model file")->required();
  eval->add_option("--data", eval_data, "dataset manifest")->required();
  eval->add_option("--out", eval_out, "report CSV path");

  auto* sweep = app.add_subcommand("sweep", "run the labeled-fraction protocol");
  sweep->allow_extras();
  sweep->add_option("--config", sweep_config, "JSON config file");
  sweep->add_option("--out", cli_out, "report CSV path");

  auto* config = app.add_subcommand("config", "list config keys and defaults");

  try {
    app.parse(argc, argv);

    if (gen->parsed()) return cmd_gen(gen_kind, gen_n, gen_noise, gen_ambient, gen_seed, gen_out);
    if (eval->parsed()) return cmd_eval(eval_model, eval_data, eval_out);
    if (config->parsed()) return cmd_config();

    if (train->parsed()) {
      mhlr::RunConfig cfg = make_config(train_config, train->remaining());
      if (seed_given) cfg.set_json("seed", cli_seed);
      if (!cli_out.empty()) cfg.set_json("out", cli_out);
      return cmd_train(cfg);
    }
    if (sweep->parsed()) {
      mhlr::RunConfig cfg = make_config(sweep_config, sweep->remaining());
      if (!cli_out.empty()) cfg.set_json("out", cli_out);
      return cmd_sweep(cfg);
    }
    return 2;
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const mhlr::config_error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
