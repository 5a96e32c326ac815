#pragma once

#include <cstdint>
#include <vector>

#include "comrisk/params.hpp"

namespace comrisk {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment estimates for every tensor of one ParamStore.
struct AdamState {
  explicit AdamState(const ParamStore& params, AdamConfig config = {});

  AdamConfig config;
  std::int64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
};

/// One bias-corrected Adam update using `state.config.lr`. The step counter
/// is incremented before the bias correction. Throws NumericError naming the
/// parameter when a gradient is not finite.
void adam_step(ParamStore& params, const std::vector<Tensor>& grads,
               AdamState& state);

/// lr_min + (lr_max - lr_min) * (1 + cos(pi * step / total)) / 2.
double cosine_annealing_lr(int step, int total, double lr_max, double lr_min);

}  // namespace comrisk
