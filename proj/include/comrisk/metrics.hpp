#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>

#include <json.hpp>

namespace comrisk {

struct MetricsReport {
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double accuracy = 0.0;
  double precision = 0.0;  // 0 when nothing is predicted positive
  double recall = 0.0;     // 0 when no positives exist
  double f1 = 0.0;         // 0 when precision + recall == 0
  std::optional<double> auc;  // empty when the split holds a single class

  std::size_t total() const { return tp + fp + tn + fn; }
};

/// Area under the ROC curve via the rank-sum statistic with mid-ranks for
/// ties. Empty when either class is absent.
std::optional<double> auc_score(std::span<const double> scores, std::span<const int> labels);

/// Positive class is label 1; a score >= threshold predicts positive.
MetricsReport compute_metrics(std::span<const double> scores, std::span<const int> labels,
                              double threshold = 0.5);

nlohmann::ordered_json to_json(const MetricsReport& m);
std::string render_text(const MetricsReport& m);

}  // namespace comrisk
