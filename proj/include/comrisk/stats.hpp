#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "comrisk/ekg.hpp"
#include "comrisk/features.hpp"

namespace comrisk::stats {

/// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);
/// Student-t cumulative distribution with `df` > 0 degrees of freedom.
double student_t_cdf(double t, double df);
/// Two-sided tail probability P(|T| >= |t|).
double student_t_two_sided_p(double t, double df);

struct CorrelationResult {
  double r = 0.0;
  double p = 1.0;
};

/// Pearson product-moment correlation (point-biserial for a 0/1 label) with
/// a two-sided p-value from t = r sqrt((n-2)/(1-r^2)) on n-2 degrees of
/// freedom. Throws NumericError when either input is constant and
/// DimensionError on length mismatch or n < 3.
CorrelationResult correlation(std::span<const double> x, std::span<const double> y);

enum class TTestVariant { Welch, Pooled };

struct TTestResult {
  double t = 0.0;
  double df = 0.0;
  double p = 1.0;
  /// Both groups (Welch) or the pooled estimate had zero variance; t is 0
  /// or +-inf and p is 1 or 0 accordingly.
  bool zero_variance = false;
};

/// Independent-samples t-test of mean(a) - mean(b), two-sided. Throws
/// DimensionError when a group has fewer than two values.
TTestResult t_test(std::span<const double> a, std::span<const double> b,
                   TTestVariant variant = TTestVariant::Welch);

/// 3 for p < 0.01, 2 for p < 0.05, 1 for p < 0.10, else 0.
int significance_stars(double p);

enum class Polarity { Positive, Negative };

struct StatsRow {
  std::string indicator;
  bool defined = true;  // false when the indicator is constant
  double coefficient = 0.0;
  Polarity polarity = Polarity::Positive;
  double mean_surviving = 0.0;
  double mean_bankrupt = 0.0;
  double p_corr = 1.0;
  double p_ttest = 1.0;
  int stars_corr = 0;
  int stars_ttest = 0;
};

struct StatsReport {
  std::vector<StatsRow> rows;
  TTestVariant variant = TTestVariant::Welch;
  std::size_t n_surviving = 0;
  std::size_t n_bankrupt = 0;
};

/// Correlation and t-test of every extracted feature against the label, over
/// all labeled enterprises. Throws DataError when only one class is present.
StatsReport build_indicator_table(const EnterpriseKG& kg,
                         TTestVariant variant = TTestVariant::Welch);

std::string render_text(const StatsReport& report);
std::string render_csv(const StatsReport& report);

}  // namespace comrisk::stats
