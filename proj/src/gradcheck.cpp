#include "comrisk/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "comrisk/errors.hpp"
#include "comrisk/ops.hpp"

namespace comrisk {
namespace {

Tensor eval_terms(const ParamStore& params, const LossFn& loss) {
  Tape tape;
  BoundParams bound(tape, params);
  return loss(tape, bound).value();
}

// Sum of up - down taken term by term, so the cancellation happens before
// the large partial sums are rounded.
long double term_difference(const Tensor& up, const Tensor& down) {
  long double d = 0.0L;
  for (std::size_t i = 0; i < up.size(); ++i) {
    d += static_cast<long double>(up[i]) - static_cast<long double>(down[i]);
  }
  return d;
}

}  // namespace

GradCheckResult grad_check(ParamStore& params, const LossFn& loss, double h) {
  if (!(h >= 1e-7 && h <= 1e-4)) {
    throw ConfigError("grad_check: step h must lie in [1e-7, 1e-4]");
  }
  std::vector<Tensor> analytic;
  {
    Tape tape;
    BoundParams bound(tape, params);
    Var root = loss(tape, bound);
    tape.backward(root.value().size() == 1 ? root : ops::sum(root));
    analytic = bound.gradients();
  }

  GradCheckResult res;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& value = params.value(p);
    for (std::size_t k = 0; k < value.size(); ++k) {
      const double orig = value[k];
      value[k] = orig + h;
      const Tensor up = eval_terms(params, loss);
      value[k] = orig - h;
      const Tensor down = eval_terms(params, loss);
      value[k] = orig;

      const double numeric =
          static_cast<double>(term_difference(up, down) / (2.0L * static_cast<long double>(h)));
      const double a = analytic[p][k];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-8});
      const double rel = std::abs(a - numeric) / denom;
      ++res.coordinates;
      if (rel > res.max_rel_error || res.coordinates == 1) {
        res.max_rel_error = rel;
        res.worst_param = params.name(p);
        res.worst_index = k;
        res.analytic = a;
        res.numeric = numeric;
      }
    }
  }
  return res;
}

}  // namespace comrisk
