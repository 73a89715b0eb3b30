#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "mhlr/csv.hpp"
#include "mhlr/dataset.hpp"
#include "mhlr/model.hpp"
#include "mhlr/types.hpp"

namespace mhlr {

/// Non-interpolated average precision of a ranked list: sort by score
/// descending (ties by ascending original index), average precision at the
/// rank of every relevant item.
inline double average_precision(const std::vector<double>& scores,
                                const std::vector<bool>& relevance) {
  if (scores.size() != relevance.size()) {
    throw validation_error("scores and relevance lengths differ");
  }
  const std::size_t m = scores.size();
  const long total_relevant = std::count(relevance.begin(), relevance.end(), true);
  if (total_relevant == 0) throw validation_error("average precision needs >= 1 relevant item");

  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });

  double sum = 0.0;
  long hits = 0;
  for (std::size_t rank = 0; rank < m; ++rank) {
    if (relevance[order[rank]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  return sum / static_cast<double>(total_relevant);
}

inline double mean_average_precision(const std::vector<double>& per_class_ap) {
  if (per_class_ap.empty()) throw validation_error("mean average precision needs >= 1 class");
  double sum = 0.0;
  for (double ap : per_class_ap) sum += ap;
  return sum / static_cast<double>(per_class_ap.size());
}

/// Scores of one evaluation cell: per-class AP, their mean, and argmax
/// accuracy, tagged with the protocol coordinates that produced them.
struct EvalReport {
  std::map<int, double> per_class_ap;
  double map = 0.0;
  double accuracy = 0.0;
  double fraction = 1.0;
  std::string method;
  std::uint64_t seed = 0;
};

/// Scores a one-vs-rest model on a dataset with ground-truth labels.
inline EvalReport evaluate_model(const MulticlassModel& model, const MultiviewDataset& data) {
  data.validate();
  EvalReport report;
  const Matrix scores = score_matrix(model, data.views);

  for (std::size_t c = 0; c < model.class_order.size(); ++c) {
    const int cls = model.class_order[c];
    std::vector<double> s(static_cast<std::size_t>(scores.rows()));
    std::vector<bool> rel(static_cast<std::size_t>(scores.rows()));
    for (Index r = 0; r < scores.rows(); ++r) {
      s[static_cast<std::size_t>(r)] = scores(r, static_cast<Index>(c));
      rel[static_cast<std::size_t>(r)] = data.labels[static_cast<std::size_t>(r)] == cls;
    }
    report.per_class_ap[cls] = average_precision(s, rel);
  }

  std::vector<double> aps;
  for (const auto& [cls, ap] : report.per_class_ap) aps.push_back(ap);
  report.map = mean_average_precision(aps);

  const std::vector<int> predicted = predict_classes(model, data.views);
  Index correct = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == data.labels[i]) ++correct;
  }
  report.accuracy = static_cast<double>(correct) / static_cast<double>(predicted.size());
  return report;
}

struct NamedMethod {
  std::string name;
  MethodSpec spec;
};

/// The labeled-fraction protocol defaults.
inline const std::vector<double>& default_fractions() {
  static const std::vector<double> f = {0.1, 0.3, 0.5, 0.7, 1.0};
  return f;
}

/// Runs every (method, fraction, seed) cell: mask the training labels at the
/// fraction, train one-vs-rest, score the fixed test set. Masks depend only
/// on (fraction, seed), so methods are compared on identical labeled sets.
/// Reports come back sorted by (method, fraction, seed).
inline std::vector<EvalReport> fraction_sweep(const MultiviewDataset& train,
                                              const MultiviewDataset& test,
                                              const std::vector<NamedMethod>& methods,
                                              const std::vector<double>& fractions,
                                              const std::vector<std::uint64_t>& seeds) {
  if (methods.empty()) throw validation_error("fraction_sweep needs >= 1 method");
  if (fractions.empty()) throw validation_error("fraction_sweep needs >= 1 fraction");
  if (seeds.empty()) throw validation_error("fraction_sweep needs >= 1 seed");
  for (double f : fractions) {
    if (!(f > 0.0) || f > 1.0) {
      throw validation_error("sweep fraction must lie in (0, 1], got " + std::to_string(f));
    }
  }

  std::vector<NamedMethod> ordered = methods;
  std::sort(ordered.begin(), ordered.end(),
            [](const NamedMethod& a, const NamedMethod& b) { return a.name < b.name; });
  std::vector<double> sorted_fractions = fractions;
  std::sort(sorted_fractions.begin(), sorted_fractions.end());
  std::vector<std::uint64_t> sorted_seeds = seeds;
  std::sort(sorted_seeds.begin(), sorted_seeds.end());

  std::vector<EvalReport> reports;
  for (const NamedMethod& method : ordered) {
    for (double fraction : sorted_fractions) {
      for (std::uint64_t seed : sorted_seeds) {
        const MultiviewDataset masked = mask_labeled_fraction(train, fraction, seed);
        const MulticlassModel model = train_one_vs_rest(masked, method.spec);
        EvalReport report = evaluate_model(model, test);
        report.fraction = fraction;
        report.method = method.name;
        report.seed = seed;
        reports.push_back(std::move(report));
      }
    }
  }
  return reports;
}

/// CSV rows: one per class with its AP, then one summary row per cell with
/// class "all" and the ap field empty. The map and accuracy columns repeat
/// the cell values on every row.
inline void write_report_csv(const std::vector<EvalReport>& reports, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw io_error("cannot write report: " + path);
  out << "method,fraction,seed,class,ap,map,accuracy\n";
  char buf[64];
  auto num = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return std::string(buf);
  };
  for (const EvalReport& r : reports) {
    const std::string prefix =
        r.method + "," + num(r.fraction) + "," + std::to_string(r.seed) + ",";
    const std::string suffix = "," + num(r.map) + "," + num(r.accuracy) + "\n";
    for (const auto& [cls, ap] : r.per_class_ap) {
      out << prefix << cls << ',' << num(ap) << suffix;
    }
    out << prefix << "all," << suffix;
  }
  if (!out) throw io_error("write failed: " + path);
}

}  // namespace mhlr
