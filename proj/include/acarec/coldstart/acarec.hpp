#pragma once

#include <string>
#include <string_view>

#include "acarec/nn/layers.hpp"
#include "acarec/nn/matrix.hpp"
#include "acarec/nn/params.hpp"
#include "json.hpp"

namespace acarec::coldstart {

enum class Fusion { Direct, Residual, Glu, Gru };

inline std::string_view to_string(Fusion f) {
  switch (f) {
    case Fusion::Direct: return "direct";
    case Fusion::Residual: return "residual";
    case Fusion::Glu: return "glu";
    case Fusion::Gru: return "gru";
  }
  return "?";
}

inline Fusion parse_fusion(std::string_view s) {
  if (s == "direct") return Fusion::Direct;
  if (s == "residual") return Fusion::Residual;
  if (s == "glu") return Fusion::Glu;
  if (s == "gru") return Fusion::Gru;
  fail(ErrorKind::Config, "unknown fusion mode '" + std::string(s) + "' (expected direct, residual, glu or gru)");
}

struct ACARecConfig {
  std::size_t content_dim = 0;
  std::size_t embed_dim = 0;
  std::size_t heads = 2;
  bool self_attention = true;
  bool content_input = true;
  Fusion fusion = Fusion::Gru;
  std::size_t train_context = 5;

  std::size_t key_dim() const { return content_dim + embed_dim; }
  std::size_t feature_dim() const { return embed_dim + (content_input ? content_dim : 0); }

  void validate() const {
    if (content_dim == 0 || embed_dim == 0) fail(ErrorKind::Config, "acarec dimensions must be positive");
    if (heads == 0) fail(ErrorKind::Config, "acarec.heads must be positive");
    if (train_context == 0) fail(ErrorKind::Config, "acarec.train_context must be positive");
  }

  std::string label() const {
    return std::string(self_attention ? "sa" : "nosa") + "+" + (content_input ? "ci" : "noci") + "+" +
           std::string(to_string(fusion));
  }
};

inline nlohmann::json to_json(const ACARecConfig& c) {
  return {{"content_dim", c.content_dim}, {"embed_dim", c.embed_dim},         {"heads", c.heads},
          {"self_attention", c.self_attention}, {"content_input", c.content_input},
          {"fusion", to_string(c.fusion)},  {"train_context", c.train_context}};
}

inline ACARecConfig acarec_config_from_json(const nlohmann::json& j) {
  ACARecConfig c;
  c.content_dim = j.at("content_dim");
  c.embed_dim = j.at("embed_dim");
  c.heads = j.at("heads");
  c.self_attention = j.at("self_attention");
  c.content_input = j.at("content_input");
  c.fusion = parse_fusion(j.at("fusion").get<std::string>());
  c.train_context = j.at("train_context");
  c.validate();
  return c;
}

// Tensors of the modes that are not selected stay empty.
template <class T>
struct ACARecParams {
  using scalar_type = T;
  nn::MhaParams<T> self_attn;
  nn::MhaParams<T> cross_attn;
  nn::LinearParams<T> linear;   // direct, residual
  nn::GluParams<T> glu;         // glu
  nn::LinearParams<T> glu_out;  // glu
  nn::GruParams<T> gru;         // gru

  static ACARecParams init(const ACARecConfig& c, Rng& rng) {
    c.validate();
    ACARecParams p;
    const std::size_t y = c.key_dim();
    if (c.self_attention) p.self_attn = nn::MhaParams<T>::init({y, y, y, y, c.heads}, rng);
    p.cross_attn = nn::MhaParams<T>::init({c.content_dim, y, c.embed_dim, c.embed_dim, c.heads}, rng);
    const std::size_t f = c.feature_dim();
    switch (c.fusion) {
      case Fusion::Direct:
      case Fusion::Residual: p.linear = nn::LinearParams<T>::init(f, c.embed_dim, rng); break;
      case Fusion::Glu:
        p.glu = nn::GluParams<T>::init(f, c.embed_dim, rng);
        p.glu_out = nn::LinearParams<T>::init(2 * c.embed_dim, c.embed_dim, rng);
        break;
      case Fusion::Gru: p.gru = nn::GruParams<T>::init(f, c.embed_dim, rng); break;
    }
    return p;
  }

  static ACARecParams zeros(const ACARecConfig& c) {
    Rng rng = make_rng(0);
    ACARecParams p = init(c, rng);
    nn::set_zero(p);
    return p;
  }

  template <class U>
  ACARecParams<U> cast() const {
    return {self_attn.template cast<U>(), cross_attn.template cast<U>(), linear.template cast<U>(),
            glu.template cast<U>(),       glu_out.template cast<U>(),    gru.template cast<U>()};
  }

  template <class Self, class F>
  static void visit_impl(Self& s, F& f) {
    s.self_attn.visit(nn::prefixed("self_attn", f));
    s.cross_attn.visit(nn::prefixed("cross_attn", f));
    s.linear.visit(nn::prefixed("linear", f));
    s.glu.visit(nn::prefixed("glu", f));
    s.glu_out.visit(nn::prefixed("glu_out", f));
    s.gru.visit(nn::prefixed("gru", f));
  }
  template <class F> void visit(F&& f) { visit_impl(*this, f); }
  template <class F> void visit(F&& f) const { visit_impl(*this, f); }
};

template <class T>
struct ACARecCache {
  nn::MhaCache<T> self, cross;
  nn::BasicMatrix<T> proto, features, glu_cat;
  nn::GluCache<T> glu;
  nn::GruCache<T> gru;
};

template <class T>
nn::BasicMatrix<T> fuse(const nn::BasicMatrix<T>& proto, const nn::BasicMatrix<T>& features, Fusion mode,
                        const ACARecParams<T>& p, ACARecCache<T>& cache) {
  auto need = [&](bool ok) {
    if (!ok) fail(ErrorKind::Config, "fusion mode " + std::string(to_string(mode)) + " has no parameters");
  };
  cache.proto = proto;
  cache.features = features;
  switch (mode) {
    case Fusion::Direct:
      need(!p.linear.weight.empty());
      return nn::linear_forward(features, p.linear);
    case Fusion::Residual:
      need(!p.linear.weight.empty());
      return proto + nn::linear_forward(features, p.linear);
    case Fusion::Glu:
      need(!p.glu.value.weight.empty() && !p.glu_out.weight.empty());
      cache.glu_cat = nn::hconcat(nn::glu_forward(features, p.glu, cache.glu), proto);
      return nn::linear_forward(cache.glu_cat, p.glu_out);
    case Fusion::Gru:
      need(!p.gru.w_z.empty());
      return nn::gru_step(proto, features, p.gru, cache.gru);
  }
  fail(ErrorKind::Config, "unknown fusion mode");
}

// x_t: 1 x d_c. x_a: n x d_c and e_a: n x d_e are the index-aligned content
// and CF embeddings of the artist context.
template <class T>
nn::BasicMatrix<T> acarec_forward(const nn::BasicMatrix<T>& x_t, const nn::BasicMatrix<T>& x_a,
                                  const nn::BasicMatrix<T>& e_a, const ACARecParams<T>& p, const ACARecConfig& c,
                                  ACARecCache<T>& cache) {
  if (e_a.rows() == 0) fail(ErrorKind::EmptyContext, "acarec: empty artist context");
  nn::require(x_a.rows() == e_a.rows(), "acarec: content context has " + std::to_string(x_a.rows()) +
                                            " rows, embedding context " + std::to_string(e_a.rows()));
  nn::require(x_t.rows() == 1 && x_t.cols() == c.content_dim && x_a.cols() == c.content_dim,
              "acarec: content width must be " + std::to_string(c.content_dim));
  nn::require(e_a.cols() == c.embed_dim, "acarec: embedding width must be " + std::to_string(c.embed_dim));
  const auto y = nn::hconcat(x_a, e_a);
  const auto keys = c.self_attention ? nn::mha_forward(y, y, y, p.self_attn, cache.self) : y;
  const auto attended = nn::mha_forward(x_t, keys, e_a, p.cross_attn, cache.cross);
  const auto features = c.content_input ? nn::hconcat(attended, x_t) : attended;
  return fuse(nn::column_mean(e_a), features, c.fusion, p, cache);
}

// Accumulates parameter gradients for upstream gradient `dout` (1 x d_e).
// The context and content are inputs, not parameters, so their gradients are
// dropped.
template <class T>
void acarec_backward(const ACARecCache<T>& cache, const ACARecParams<T>& p, const ACARecConfig& c,
                     const nn::BasicMatrix<T>& dout, ACARecParams<T>& g) {
  nn::BasicMatrix<T> dfeatures;
  switch (c.fusion) {
    case Fusion::Direct:
    case Fusion::Residual: dfeatures = nn::linear_backward(cache.features, p.linear, dout, g.linear); break;
    case Fusion::Glu: {
      const auto dcat = nn::linear_backward(cache.glu_cat, p.glu_out, dout, g.glu_out);
      dfeatures = nn::glu_backward(cache.glu, p.glu, nn::col_slice(dcat, 0, c.embed_dim), g.glu);
      break;
    }
    case Fusion::Gru: dfeatures = nn::gru_backward(cache.gru, p.gru, dout, g.gru).dx; break;
  }
  const auto dattended = c.content_input ? nn::col_slice(dfeatures, 0, c.embed_dim) : dfeatures;
  const auto din = nn::mha_backward(cache.cross, p.cross_attn, dattended, g.cross_attn);
  if (c.self_attention) nn::mha_backward(cache.self, p.self_attn, din.dk, g.self_attn);
}

}  // namespace acarec::coldstart
