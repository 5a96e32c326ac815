#include "comrisk/optim.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "comrisk/errors.hpp"

namespace comrisk {

AdamState::AdamState(const ParamStore& params, AdamConfig cfg) : config(cfg) {
  if (!(cfg.lr > 0.0) || !(cfg.beta1 > 0.0 && cfg.beta1 < 1.0) ||
      !(cfg.beta2 > 0.0 && cfg.beta2 < 1.0) || !(cfg.eps > 0.0)) {
    throw ConfigError("Adam: lr and eps must be positive, betas in (0,1)");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    m.emplace_back(params.value(i).shape(), 0.0);
    v.emplace_back(params.value(i).shape(), 0.0);
  }
}

void adam_step(ParamStore& params, const std::vector<Tensor>& grads,
               AdamState& state) {
  if (grads.size() != params.size() || state.m.size() != params.size()) {
    throw DimensionError("adam_step: parameter/gradient count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (grads[i].size() != params.value(i).size()) {
      throw DimensionError("adam_step: gradient shape " +
                           shape_str(grads[i].shape()) + " for parameter " +
                           params.name(i) + " of shape " +
                           shape_str(params.value(i).shape()));
    }
    if (!grads[i].all_finite()) {
      throw NumericError("non-finite gradient for parameter " + params.name(i));
    }
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = params.value(i);
    Tensor& m = state.m[i];
    Tensor& v = state.v[i];
    const Tensor& g = grads[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double m_hat = m[k] / bc1;
      const double v_hat = v[k] / bc2;
      p[k] -= c.lr * m_hat / (std::sqrt(v_hat) + c.eps);
    }
  }
}

double cosine_annealing_lr(int step, int total, double lr_max, double lr_min) {
  if (total < 1) throw ConfigError("cosine schedule: total must be >= 1");
  if (step < 0 || step > total) {
    throw ConfigError("cosine schedule: step " + std::to_string(step) +
                      " outside [0, " + std::to_string(total) + "]");
  }
  const double frac = static_cast<double>(step) / static_cast<double>(total);
  return lr_min +
         0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * frac));
}

}  // namespace comrisk
