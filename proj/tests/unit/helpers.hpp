#pragma once

#include <functional>
#include <string>
#include <vector>

#include "comrisk/gradcheck.hpp"
#include "comrisk/ops.hpp"
#include "comrisk/params.hpp"
#include "comrisk/rng.hpp"
#include "comrisk/tensor.hpp"

namespace testutil {

inline comrisk::Tensor random_tensor(std::size_t rows, std::size_t cols, comrisk::Rng& rng,
                                     double lo = -2.0, double hi = 2.0) {
  comrisk::Tensor t({rows, cols}, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Finite-difference check of a function of named inputs, all treated as
// parameters.
inline double op_grad_error(
    std::vector<std::pair<std::string, comrisk::Tensor>> inputs,
    const std::function<comrisk::Var(const comrisk::BoundParams&)>& f, double h = 1e-6) {
  comrisk::ParamStore store;
  for (auto& [name, t] : inputs) store.add(name, std::move(t));
  return comrisk::grad_check(
             store, [&](comrisk::Tape&, const comrisk::BoundParams& p) { return f(p); }, h)
      .max_rel_error;
}

}  // namespace testutil

#include <algorithm>
#include <cmath>

#include "comrisk/autodiff.hpp"

namespace testutil {

// Plain logistic regression on z-scored columns, full-batch gradient
// descent. Used as an independent classifier in generator tests.
struct Logistic {
  std::vector<double> mean, sd, w;
  double b = 0.0;

  void fit(const std::vector<std::vector<double>>& x, const std::vector<int>& y,
           int iters = 2000, double lr = 0.5) {
    const std::size_t n = x.size(), d = x.at(0).size();
    mean.assign(d, 0.0);
    sd.assign(d, 0.0);
    for (const auto& r : x)
      for (std::size_t j = 0; j < d; ++j) mean[j] += r[j] / n;
    for (const auto& r : x)
      for (std::size_t j = 0; j < d; ++j) sd[j] += (r[j] - mean[j]) * (r[j] - mean[j]) / n;
    for (double& s : sd) s = s > 0 ? std::sqrt(s) : 1.0;
    w.assign(d, 0.0);
    b = 0.0;
    for (int it = 0; it < iters; ++it) {
      std::vector<double> gw(d, 0.0);
      double gb = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double err = predict(x[i]) - y[i];
        for (std::size_t j = 0; j < d; ++j) gw[j] += err * (x[i][j] - mean[j]) / sd[j] / n;
        gb += err / n;
      }
      for (std::size_t j = 0; j < d; ++j) w[j] -= lr * gw[j];
      b -= lr * gb;
    }
  }

  double predict(const std::vector<double>& r) const {
    double z = b;
    for (std::size_t j = 0; j < w.size(); ++j) z += w[j] * (r[j] - mean[j]) / sd[j];
    return 1.0 / (1.0 + std::exp(-z));
  }
};

// Central differences of the summed loss at every coordinate, compared with
// the tape gradient under |a - b| <= rtol * max(|a|, |b|) + atol. The
// absolute term absorbs one-ulp changes of the loss, which show up as
// numeric gradients near 1e-10 where the analytic one is exactly zero.
// Returns the largest |a - b| / (rtol * max(|a|, |b|) + atol); <= 1 passes.
inline double fd_excess(comrisk::ParamStore& store, const comrisk::LossFn& loss, double h,
                        double rtol, double atol, std::string* worst = nullptr) {
  using namespace comrisk;
  auto value = [&]() {
    Tape tape;
    BoundParams p(tape, store);
    const Tensor t = loss(tape, p).value();
    long double s = 0;
    for (std::size_t i = 0; i < t.size(); ++i) s += t[i];
    return s;
  };
  std::vector<Tensor> grads;
  {
    Tape tape;
    BoundParams p(tape, store);
    tape.backward(ops::sum(loss(tape, p)));
    grads = p.gradients();
  }
  double excess = 0.0;
  for (std::size_t k = 0; k < store.size(); ++k) {
    Tensor& t = store.value(k);
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double x = t[i];
      t[i] = x + h;
      const long double up = value();
      t[i] = x - h;
      const long double down = value();
      t[i] = x;
      const double num = static_cast<double>((up - down) / (2 * h));
      const double ana = grads[k][i];
      const double e =
          std::abs(ana - num) / (rtol * std::max(std::abs(ana), std::abs(num)) + atol);
      if (e > excess) {
        excess = e;
        if (worst) *worst = store.name(k) + "[" + std::to_string(i) + "]";
      }
    }
  }
  return excess;
}

// Fraction of positive/negative pairs ranked correctly, ties counted half.
inline double brute_force_auc(const std::vector<double>& s, const std::vector<int>& y) {
  double good = 0.0, pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      good += s[i] > s[j] ? 1.0 : (s[i] == s[j] ? 0.5 : 0.0);
    }
  }
  return good / pairs;
}

}  // namespace testutil
