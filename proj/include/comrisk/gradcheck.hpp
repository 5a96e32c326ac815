#pragma once

#include <functional>
#include <string>

#include "comrisk/params.hpp"

namespace comrisk {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  std::size_t coordinates = 0;
};

/// Builds the loss on the given tape from the bound parameters. A non-scalar
/// result stands for the sum of its entries; finite differences are then
/// formed entry by entry before summing.
using LossFn = std::function<Var(Tape&, const BoundParams&)>;

/// Compares tape gradients with central differences at every coordinate of
/// every parameter. Relative error is |a - b| / max(|a|, |b|, 1e-8).
/// `params` is restored to its original values on return.
GradCheckResult grad_check(ParamStore& params, const LossFn& loss,
                           double h = 1e-6);

}  // namespace comrisk
