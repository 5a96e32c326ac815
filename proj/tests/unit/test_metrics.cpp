#include <gtest/gtest.h>

#include "comrisk/metrics.hpp"
#include "comrisk/rng.hpp"
#include "helpers.hpp"

using namespace comrisk;

TEST(Auc, WorkedExample) {
  const std::vector<double> s = {0.9, 0.4, 0.35, 0.8};
  const std::vector<int> y = {1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(*auc_score(s, y), 0.5);
}

TEST(Auc, TiesCountHalf) {
  const std::vector<double> s = {0.5, 0.5, 0.5, 0.5};
  const std::vector<int> y = {1, 0, 1, 0};
  EXPECT_DOUBLE_EQ(*auc_score(s, y), 0.5);
}

TEST(Auc, SingleClassIsUndefined) {
  const std::vector<double> s = {0.1, 0.7};
  const std::vector<int> y = {1, 1};
  EXPECT_FALSE(auc_score(s, y).has_value());
  const MetricsReport m = compute_metrics(s, y);
  EXPECT_FALSE(m.auc.has_value());
  EXPECT_DOUBLE_EQ(m.accuracy, 0.5);
}

TEST(Auc, MatchesPairwiseCountOnRandomInstances) {
  Rng rng(31, "auc-brute");
  int checked = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.below(49);
    std::vector<double> s(n);
    std::vector<int> y(n);
    // Coarse scores force plenty of ties.
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = static_cast<double>(rng.below(trial % 2 ? 5 : 1000)) / 4.0;
      y[i] = rng.bernoulli(0.4);
    }
    const std::optional<double> a = auc_score(s, y);
    const bool both = std::count(y.begin(), y.end(), 1) && std::count(y.begin(), y.end(), 0);
    ASSERT_EQ(a.has_value(), both);
    if (!both) continue;
    ++checked;
    EXPECT_EQ(*a, testutil::brute_force_auc(s, y));
  }
  EXPECT_GT(checked, 150);
}

TEST(Metrics, PerfectSeparation) {
  const std::vector<double> s = {0.9, 0.1, 0.8, 0.2};
  const std::vector<int> y = {1, 0, 1, 0};
  const MetricsReport m = compute_metrics(s, y);
  EXPECT_EQ(m.accuracy, 1.0);
  EXPECT_EQ(m.precision, 1.0);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.f1, 1.0);
  EXPECT_EQ(*m.auc, 1.0);
}

TEST(Metrics, AllPredictedPositive) {
  const std::vector<double> s = {0.7, 0.6, 0.9, 0.5};
  const std::vector<int> y = {1, 0, 1, 0};
  const MetricsReport m = compute_metrics(s, y);
  EXPECT_EQ(m.recall, 1.0);
  EXPECT_EQ(m.accuracy, 0.5);
  EXPECT_EQ(m.fp, 2u);
  EXPECT_EQ(m.tn, 0u);
}

TEST(Metrics, ThresholdIsInclusive) {
  const std::vector<double> s = {0.5, 0.4999999};
  const std::vector<int> y = {1, 0};
  const MetricsReport m = compute_metrics(s, y);
  EXPECT_EQ(m.tp, 1u);
  EXPECT_EQ(m.tn, 1u);
}

TEST(Metrics, ZeroDenominators) {
  const std::vector<double> s = {0.1, 0.2};
  const std::vector<int> y = {0, 0};
  const MetricsReport m = compute_metrics(s, y);
  EXPECT_EQ(m.precision, 0.0);
  EXPECT_EQ(m.recall, 0.0);
  EXPECT_EQ(m.f1, 0.0);
  EXPECT_EQ(m.accuracy, 1.0);
}

TEST(Metrics, ConfusionIdentitiesHoldExactly) {
  Rng rng(32, "metric-identities");
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(50);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = rng.uniform();
      y[i] = rng.bernoulli(0.5);
    }
    const MetricsReport m = compute_metrics(s, y);
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool pred = s[i] >= 0.5;
      (pred ? (y[i] ? tp : fp) : (y[i] ? fn : tn))++;
    }
    ASSERT_EQ(m.tp, tp);
    ASSERT_EQ(m.fp, fp);
    ASSERT_EQ(m.tn, tn);
    ASSERT_EQ(m.fn, fn);
    EXPECT_EQ(m.total(), n);
    EXPECT_EQ(m.accuracy, static_cast<double>(tp + tn) / n);
    EXPECT_EQ(m.precision, tp + fp ? static_cast<double>(tp) / (tp + fp) : 0.0);
    EXPECT_EQ(m.recall, tp + fn ? static_cast<double>(tp) / (tp + fn) : 0.0);
    const double pr = m.precision + m.recall;
    EXPECT_EQ(m.f1, pr > 0 ? 2 * m.precision * m.recall / pr : 0.0);
  }
}

TEST(Metrics, JsonAndTextCarryTheFields) {
  const std::vector<double> s = {0.9, 0.4, 0.35, 0.8};
  const std::vector<int> y = {1, 0, 1, 0};
  const MetricsReport m = compute_metrics(s, y);
  const auto j = to_json(m);
  for (const char* k : {"accuracy", "precision", "recall", "f1", "auc"}) EXPECT_TRUE(j.contains(k));
  EXPECT_DOUBLE_EQ(j["auc"].get<double>(), 0.5);
  const std::string text = render_text(m);
  EXPECT_NE(text.find("accuracy"), std::string::npos);
  EXPECT_NE(text.find("0.5"), std::string::npos);
}
