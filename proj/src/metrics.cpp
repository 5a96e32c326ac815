#include "comrisk/metrics.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <vector>

#include "comrisk/errors.hpp"

namespace comrisk {

std::optional<double> auc_score(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw DimensionError("auc: length mismatch");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  double rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    // Ranks i+1 .. j share their mean.
    const double mid = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      if (labels[order[k]] == 1) rank_sum += mid;
    }
    i = j;
  }
  for (int y : labels) n_pos += y == 1;
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) return std::nullopt;
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  return (rank_sum - np * (np + 1.0) / 2.0) / (np * nn);
}

MetricsReport compute_metrics(std::span<const double> scores, std::span<const int> labels,
                              double threshold) {
  if (scores.size() != labels.size()) throw DimensionError("metrics: length mismatch");
  if (scores.empty()) throw DataError("metrics: empty split");
  MetricsReport m;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool pred = scores[i] >= threshold;
    const bool pos = labels[i] == 1;
    if (pred && pos) ++m.tp;
    else if (pred) ++m.fp;
    else if (pos) ++m.fn;
    else ++m.tn;
  }
  m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total());
  if (m.tp + m.fp) m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
  if (m.tp + m.fn) m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  }
  m.auc = auc_score(scores, labels);
  return m;
}

nlohmann::ordered_json to_json(const MetricsReport& m) {
  nlohmann::ordered_json j;
  j["accuracy"] = m.accuracy;
  j["precision"] = m.precision;
  j["recall"] = m.recall;
  j["f1"] = m.f1;
  j["auc"] = m.auc ? nlohmann::ordered_json(*m.auc) : nlohmann::ordered_json(nullptr);
  j["tp"] = m.tp;
  j["fp"] = m.fp;
  j["tn"] = m.tn;
  j["fn"] = m.fn;
  return j;
}

std::string render_text(const MetricsReport& m) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "accuracy  %.4f\nprecision %.4f\nrecall    %.4f\nf1        %.4f\n"
                "auc       %s\nconfusion tp=%zu fp=%zu tn=%zu fn=%zu\n",
                m.accuracy, m.precision, m.recall, m.f1,
                m.auc ? std::to_string(*m.auc).c_str() : "undefined (single class)",
                m.tp, m.fp, m.tn, m.fn);
  return buf;
}

}  // namespace comrisk
