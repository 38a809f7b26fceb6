#pragma once

#include <cmath>

#include "acarec/nn/layers.hpp"
#include "acarec/nn/matrix.hpp"
#include "json.hpp"

namespace acarec::coldstart {

// Content encoder regressing CF embeddings: two tanh hidden layers of width
// d_e and a linear output. The artist variant also sees the artist's mean CF
// embedding.
struct DeepMusicConfig {
  std::size_t content_dim = 0;
  std::size_t embed_dim = 0;
  bool artist_mean = false;

  std::size_t input_dim() const { return content_dim + (artist_mean ? embed_dim : 0); }

  void validate() const {
    if (content_dim == 0 || embed_dim == 0) fail(ErrorKind::Config, "deepmusic dimensions must be positive");
  }
};

inline nlohmann::json to_json(const DeepMusicConfig& c) {
  return {{"content_dim", c.content_dim}, {"embed_dim", c.embed_dim}, {"artist_mean", c.artist_mean}};
}

inline DeepMusicConfig deepmusic_config_from_json(const nlohmann::json& j) {
  DeepMusicConfig c;
  c.content_dim = j.at("content_dim");
  c.embed_dim = j.at("embed_dim");
  c.artist_mean = j.at("artist_mean");
  c.validate();
  return c;
}

template <class T>
struct DeepMusicParams {
  using scalar_type = T;
  nn::LinearParams<T> hidden1, hidden2, out;

  static DeepMusicParams init(const DeepMusicConfig& c, Rng& rng) {
    c.validate();
    return {nn::LinearParams<T>::init(c.input_dim(), c.embed_dim, rng),
            nn::LinearParams<T>::init(c.embed_dim, c.embed_dim, rng),
            nn::LinearParams<T>::init(c.embed_dim, c.embed_dim, rng)};
  }

  template <class U>
  DeepMusicParams<U> cast() const {
    return {hidden1.template cast<U>(), hidden2.template cast<U>(), out.template cast<U>()};
  }

  template <class Self, class F>
  static void visit_impl(Self& s, F& f) {
    s.hidden1.visit(nn::prefixed("hidden1", f));
    s.hidden2.visit(nn::prefixed("hidden2", f));
    s.out.visit(nn::prefixed("out", f));
  }
  template <class F> void visit(F&& f) { visit_impl(*this, f); }
  template <class F> void visit(F&& f) const { visit_impl(*this, f); }
};

template <class T>
struct DeepMusicCache {
  nn::BasicMatrix<T> x, h1, h2;  // h1, h2 after tanh
};

// x: rows of [x_t] or [x_t ; mean embedding].
template <class T>
nn::BasicMatrix<T> deepmusic_forward(const nn::BasicMatrix<T>& x, const DeepMusicParams<T>& p,
                                     DeepMusicCache<T>& cache) {
  nn::require(x.cols() == p.hidden1.in_dim(), "deepmusic: input width " + std::to_string(x.cols()) +
                                                  " vs expected " + std::to_string(p.hidden1.in_dim()));
  cache.x = x;
  cache.h1 = nn::linear_forward(x, p.hidden1);
  for (auto& v : cache.h1.flat()) v = std::tanh(v);
  cache.h2 = nn::linear_forward(cache.h1, p.hidden2);
  for (auto& v : cache.h2.flat()) v = std::tanh(v);
  return nn::linear_forward(cache.h2, p.out);
}

template <class T>
void deepmusic_backward(const DeepMusicCache<T>& cache, const DeepMusicParams<T>& p, const nn::BasicMatrix<T>& dout,
                        DeepMusicParams<T>& g) {
  auto d2 = nn::linear_backward(cache.h2, p.out, dout, g.out);
  for (std::size_t i = 0; i < d2.size(); ++i) d2[i] *= T(1) - cache.h2[i] * cache.h2[i];
  auto d1 = nn::linear_backward(cache.h1, p.hidden2, d2, g.hidden2);
  for (std::size_t i = 0; i < d1.size(); ++i) d1[i] *= T(1) - cache.h1[i] * cache.h1[i];
  nn::linear_backward(cache.x, p.hidden1, d1, g.hidden1);
}

}  // namespace acarec::coldstart
