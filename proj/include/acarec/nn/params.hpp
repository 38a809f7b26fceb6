#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "acarec/nn/matrix.hpp"
#include "acarec/nn/random.hpp"

namespace acarec::nn {

// Parameter structs expose `visit(f)` calling f(name, matrix) for every
// tensor they own, in a fixed order. Everything below (optimizer,
// checkpoints, gradient checks) is written against that single hook.

template <class F>
auto prefixed(std::string prefix, F& f) {
  return [prefix = std::move(prefix), &f](std::string_view name, auto& m) {
    f(prefix + "." + std::string(name), m);
  };
}

template <class T>
struct NamedTensor {
  std::string name;
  BasicMatrix<T>* tensor;
};

template <class P>
auto tensor_list(P& params) {
  using T = typename P::scalar_type;
  std::vector<NamedTensor<T>> out;
  params.visit([&](std::string_view name, BasicMatrix<T>& m) {
    if (!m.empty()) out.push_back({std::string(name), &m});
  });
  return out;
}

template <class P>
auto tensor_list(const P& params) {
  using T = typename P::scalar_type;
  std::vector<std::pair<std::string, const BasicMatrix<T>*>> out;
  params.visit([&](std::string_view name, const BasicMatrix<T>& m) {
    if (!m.empty()) out.emplace_back(std::string(name), &m);
  });
  return out;
}

template <class P>
P zeros_like(const P& params) {
  P out = params;
  out.visit([](std::string_view, auto& m) { m.set_zero(); });
  return out;
}

template <class P>
void set_zero(P& params) {
  params.visit([](std::string_view, auto& m) { m.set_zero(); });
}

template <class P>
std::size_t parameter_count(const P& params) {
  std::size_t n = 0;
  params.visit([&](std::string_view, const auto& m) { n += m.size(); });
  return n;
}

// dst += scale * src, tensor by tensor.
template <class P, class S>
void axpy(P& dst, const P& src, S scale) {
  auto d = tensor_list(dst);
  auto s = tensor_list(src);
  require(d.size() == s.size(), "axpy: parameter structure mismatch");
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto& a = *d[i].tensor;
    const auto& b = *s[i].second;
    require(a.same_shape(b), "axpy: shape mismatch on " + d[i].name);
    for (std::size_t k = 0; k < a.size(); ++k) a[k] += static_cast<typename P::scalar_type>(scale) * b[k];
  }
}

// Copy values between parameter structs of different scalar types but
// identical layout.
template <class Dst, class Src>
void copy_values(Dst& dst, const Src& src) {
  auto d = tensor_list(dst);
  auto s = tensor_list(src);
  require(d.size() == s.size(), "copy_values: parameter structure mismatch");
  for (std::size_t i = 0; i < d.size(); ++i) {
    auto& a = *d[i].tensor;
    const auto& b = *s[i].second;
    require(a.rows() == b.rows() && a.cols() == b.cols(), "copy_values: shape mismatch on " + d[i].name);
    for (std::size_t k = 0; k < a.size(); ++k) a[k] = static_cast<typename Dst::scalar_type>(b[k]);
  }
}

// Glorot-uniform in +-sqrt(6 / (fan_in + fan_out)).
template <class T>
BasicMatrix<T> glorot_uniform(std::size_t rows, std::size_t cols, std::size_t fan_in,
                              std::size_t fan_out, Rng& rng) {
  BasicMatrix<T> m(rows, cols);
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (auto& v : m.flat()) v = static_cast<T>(uniform(rng, -limit, limit));
  return m;
}

}  // namespace acarec::nn
