#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "acarec/nn/params.hpp"

namespace acarec::nn {

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Bias-corrected Adam over any visitable parameter struct. Moment buffers are
// created lazily on the first step and mirror the parameter shapes.
template <class T>
class Adam {
 public:
  explicit Adam(AdamConfig config = {}) : config_(config) {}

  const AdamConfig& config() const { return config_; }
  std::int64_t steps() const { return step_; }

  template <class P>
  void step(P& params, const P& grads) {
    auto p = tensor_list(params);
    auto g = tensor_list(grads);
    require(p.size() == g.size(), "adam: parameter/gradient structure mismatch");
    for (std::size_t i = 0; i < p.size(); ++i) {
      require(p[i].tensor->same_shape(*g[i].second), "adam: gradient shape mismatch on " + p[i].name);
      if (!all_finite(*g[i].second))
        fail(ErrorKind::Divergence, "non-finite gradient in parameter " + p[i].name);
    }
    if (first_.empty()) {
      for (const auto& t : p) {
        first_.emplace_back(t.tensor->rows(), t.tensor->cols());
        second_.emplace_back(t.tensor->rows(), t.tensor->cols());
      }
    }
    require(first_.size() == p.size(), "adam: parameter structure changed between steps");

    ++step_;
    const double b1 = config_.beta1;
    const double b2 = config_.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(step_));
    for (std::size_t i = 0; i < p.size(); ++i) {
      auto& w = *p[i].tensor;
      const auto& gi = *g[i].second;
      auto& m = first_[i];
      auto& v = second_[i];
      for (std::size_t k = 0; k < w.size(); ++k) {
        const double gk = gi[k];
        const double mk = b1 * m[k] + (1.0 - b1) * gk;
        const double vk = b2 * v[k] + (1.0 - b2) * gk * gk;
        m[k] = mk;
        v[k] = vk;
        if (gk == 0.0 && mk == 0.0) continue;
        const double mhat = mk / c1;
        const double vhat = vk / c2;
        w[k] = static_cast<T>(w[k] - config_.learning_rate * mhat / (std::sqrt(vhat) + config_.epsilon));
      }
    }
  }

 private:
  AdamConfig config_;
  std::int64_t step_ = 0;
  std::vector<BasicMatrix<double>> first_;
  std::vector<BasicMatrix<double>> second_;
};

}  // namespace acarec::nn
