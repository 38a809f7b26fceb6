#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "acarec/nn/params.hpp"

namespace acarec::nn {

struct GradCheckOptions {
  double step = 1e-5;
  // Differences below abs_floor / rel_tol are judged absolutely: the
  // reported error is |a - n| / max(|a|, |n|, abs_floor / rel_tol).
  double rel_tol = 1e-4;
  double abs_floor = 1e-6;
};

struct GradCheckResult {
  double max_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  std::size_t checked = 0;

  bool passed(const GradCheckOptions& o = {}) const { return max_error <= o.rel_tol; }
};

inline double gradient_error(double analytic, double numeric, const GradCheckOptions& o) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), o.abs_floor / o.rel_tol});
  return std::abs(analytic - numeric) / denom;
}

// Compares analytic gradients against central differences.
//
// `params` is a visitable struct of doubles (a 64-bit shadow of the model).
// `loss_and_grad(params, grads)` must return the loss and accumulate
// dL/dparams into `grads` (which arrives zeroed). `loss(params)` returns the
// loss only.
template <class P, class LossGrad, class Loss>
GradCheckResult grad_check(P params, LossGrad&& loss_and_grad, Loss&& loss,
                           const GradCheckOptions& options = {}) {
  P grads = zeros_like(params);
  loss_and_grad(params, grads);

  GradCheckResult result;
  auto values = tensor_list(params);
  auto analytic = tensor_list(grads);
  for (std::size_t t = 0; t < values.size(); ++t) {
    auto& w = *values[t].tensor;
    const auto& g = *analytic[t].tensor;
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double saved = w[k];
      w[k] = saved + options.step;
      const double up = loss(params);
      w[k] = saved - options.step;
      const double down = loss(params);
      w[k] = saved;
      const double numeric = (up - down) / (2.0 * options.step);
      const double err = gradient_error(g[k], numeric, options);
      ++result.checked;
      if (err > result.max_error) {
        result.max_error = err;
        result.worst_tensor = values[t].name;
        result.worst_index = k;
      }
    }
  }
  return result;
}

}  // namespace acarec::nn
