#include "comrisk/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "comrisk/errors.hpp"

namespace comrisk::stats {
namespace {

// Modified Lentz evaluation of the incomplete beta continued fraction.
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 500;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw NumericError("incomplete beta continued fraction did not converge");
}

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Unbiased sample variance.
double variance_of(std::span<const double> v, double mean) {
  double s = 0.0;
  for (double x : v) s += (x - mean) * (x - mean);
  return s / static_cast<double>(v.size() - 1);
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
  if (!(a > 0.0) || !(b > 0.0)) throw NumericError("incomplete beta: a, b must be > 0");
  if (!(x >= 0.0 && x <= 1.0)) throw NumericError("incomplete beta: x outside [0,1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                           a * std::log(x) + b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return front * beta_continued_fraction(a, b, x) / a;
  }
  return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, double df) {
  if (!(df > 0.0)) throw NumericError("student t: df must be positive");
  if (std::isnan(t)) throw NumericError("student t: NaN statistic");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return incomplete_beta(0.5 * df, 0.5, x);
}

double student_t_cdf(double t, double df) {
  if (std::isinf(t)) return t > 0 ? 1.0 : 0.0;
  const double tail = 0.5 * student_t_two_sided_p(t, df);
  return t > 0.0 ? 1.0 - tail : tail;
}

CorrelationResult correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw DimensionError("correlation: length mismatch");
  if (x.size() < 3) throw DimensionError("correlation: need at least 3 samples");
  const double mx = mean_of(x), my = mean_of(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx, dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    throw NumericError("correlation undefined for a constant input");
  }
  CorrelationResult res;
  res.r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
  const double n = static_cast<double>(x.size());
  if (std::abs(res.r) >= 1.0) {
    res.p = 0.0;
  } else {
    const double t = res.r * std::sqrt((n - 2.0) / (1.0 - res.r * res.r));
    res.p = student_t_two_sided_p(t, n - 2.0);
  }
  return res;
}

TTestResult t_test(std::span<const double> a, std::span<const double> b,
                   TTestVariant variant) {
  if (a.size() < 2 || b.size() < 2) {
    throw DimensionError("t_test: each group needs at least 2 values");
  }
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double ma = mean_of(a), mb = mean_of(b);
  const double va = variance_of(a, ma), vb = variance_of(b, mb);
  const double diff = ma - mb;

  TTestResult res;
  double se2 = 0.0;
  if (variant == TTestVariant::Pooled) {
    res.df = na + nb - 2.0;
    const double sp2 = ((na - 1.0) * va + (nb - 1.0) * vb) / res.df;
    se2 = sp2 * (1.0 / na + 1.0 / nb);
  } else {
    const double qa = va / na, qb = vb / nb;
    se2 = qa + qb;
    res.df = se2 > 0.0 ? se2 * se2 / (qa * qa / (na - 1.0) + qb * qb / (nb - 1.0))
                       : na + nb - 2.0;
  }
  if (se2 == 0.0) {
    res.zero_variance = true;
    if (diff == 0.0) {
      res.t = 0.0;
      res.p = 1.0;
    } else {
      res.t = diff > 0 ? std::numeric_limits<double>::infinity()
                       : -std::numeric_limits<double>::infinity();
      res.p = 0.0;
    }
    return res;
  }
  res.t = diff / std::sqrt(se2);
  res.p = student_t_two_sided_p(res.t, res.df);
  return res;
}

int significance_stars(double p) {
  if (p < 0.01) return 3;
  if (p < 0.05) return 2;
  if (p < 0.10) return 1;
  return 0;
}

StatsReport build_indicator_table(const EnterpriseKG& kg, TTestVariant variant) {
  const FeatureTable table = extract_lawsuit_features(kg);
  std::vector<std::size_t> labeled;
  StatsReport report;
  report.variant = variant;
  for (std::size_t i = 0; i < kg.num_enterprises(); ++i) {
    if (!kg.enterprises[i].label) continue;
    labeled.push_back(i);
    (*kg.enterprises[i].label == 1 ? report.n_bankrupt : report.n_surviving)++;
  }
  if (report.n_bankrupt < 2 || report.n_surviving < 2) {
    throw DataError("statistics need at least two labeled enterprises per class");
  }
  std::vector<double> label;
  for (std::size_t i : labeled) label.push_back(*kg.enterprises[i].label);

  for (std::size_t c = 0; c < kFeatureCount; ++c) {
    StatsRow row;
    row.indicator = std::string(feature_name(c));
    std::vector<double> x, surviving, bankrupt;
    for (std::size_t i : labeled) {
      const double v = table.rows[i][c];
      x.push_back(v);
      (*kg.enterprises[i].label == 1 ? bankrupt : surviving).push_back(v);
    }
    row.mean_surviving = mean_of(surviving);
    row.mean_bankrupt = mean_of(bankrupt);
    try {
      const CorrelationResult cr = correlation(x, label);
      row.coefficient = cr.r;
      row.p_corr = cr.p;
    } catch (const NumericError&) {
      row.defined = false;
    }
    row.polarity = row.coefficient < 0.0 ? Polarity::Negative : Polarity::Positive;
    row.stars_corr = row.defined ? significance_stars(row.p_corr) : 0;
    // Surviving minus bankrupt, the orientation of the group-mean columns.
    const TTestResult tt = t_test(surviving, bankrupt, variant);
    row.p_ttest = tt.p;
    row.stars_ttest = significance_stars(tt.p);
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string stars(int n) { return std::string(static_cast<std::size_t>(n), '*'); }

}  // namespace

std::string render_text(const StatsReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-20s %12s %-9s %14s %14s %10s %10s\n",
                "indicator", "coefficient", "polarity", "mean_surviving",
                "mean_bankrupt", "p_corr", "p_ttest");
  out << line;
  for (const StatsRow& r : report.rows) {
    const std::string coef =
        r.defined ? fmt("%.6f", r.coefficient) + stars(r.stars_corr) : "n/a";
    std::snprintf(line, sizeof line, "%-20s %12s %-9s %14s %14s %10s %10s\n",
                  r.indicator.c_str(), coef.c_str(),
                  r.polarity == Polarity::Positive ? "Positive" : "Negative",
                  fmt("%.6f", r.mean_surviving).c_str(),
                  fmt("%.6f", r.mean_bankrupt).c_str(),
                  r.defined ? fmt("%.6f", r.p_corr).c_str() : "n/a",
                  (fmt("%.6f", r.p_ttest) + stars(r.stars_ttest)).c_str());
    out << line;
  }
  out << "\nsurviving=" << report.n_surviving << " bankrupt=" << report.n_bankrupt
      << "; all p-values two-sided; t-test variant: "
      << (report.variant == TTestVariant::Welch ? "Welch" : "pooled")
      << "; *** p<0.01, ** p<0.05, * p<0.10\n";
  return out.str();
}

std::string render_csv(const StatsReport& report) {
  std::ostringstream out;
  out << "indicator,coefficient,stars_corr,polarity,mean_surviving,mean_bankrupt,"
         "p_corr,p_ttest,stars_ttest\n";
  for (const StatsRow& r : report.rows) {
    out << r.indicator << ',' << (r.defined ? fmt("%.6f", r.coefficient) : "")
        << ',' << r.stars_corr << ','
        << (r.polarity == Polarity::Positive ? "Positive" : "Negative") << ','
        << fmt("%.6f", r.mean_surviving) << ',' << fmt("%.6f", r.mean_bankrupt)
        << ',' << (r.defined ? fmt("%.6f", r.p_corr) : "") << ','
        << fmt("%.6f", r.p_ttest) << ',' << r.stars_ttest << '\n';
  }
  return out.str();
}

}  // namespace comrisk::stats
