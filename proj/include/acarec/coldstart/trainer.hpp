#pragma once

#include <filesystem>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "acarec/cf/bpr.hpp"
#include "acarec/coldstart/acarec.hpp"
#include "acarec/coldstart/deepmusic.hpp"
#include "acarec/coldstart/heuristics.hpp"
#include "acarec/data/sampling.hpp"
#include "acarec/eval/evaluate.hpp"
#include "acarec/nn/adam.hpp"
#include "acarec/nn/checkpoint.hpp"

namespace acarec::coldstart {

inline constexpr std::size_t kWholeCatalog = std::numeric_limits<std::size_t>::max();

namespace detail {
template <class T>
double squared_error_grad(const nn::BasicMatrix<T>& out, std::span<const float> target, double scale,
                          nn::BasicMatrix<T>& dout) {
  dout = nn::BasicMatrix<T>(1, out.cols());
  double loss = 0;
  for (std::size_t j = 0; j < out.cols(); ++j) {
    const double d = double(out[j]) - target[j];
    loss += d * d;
    dout[j] = static_cast<T>(2.0 * d * scale);
  }
  return loss;
}
}  // namespace detail

class ACARecModel {
 public:
  using Params = ACARecParams<float>;
  ACARecConfig config;
  Params params;

  static ACARecModel create(const ACARecConfig& c, std::uint64_t seed) {
    Rng rng = make_rng(seed, 7);
    return {c, Params::init(c, rng)};
  }

  std::string method() const { return "acarec"; }
  std::size_t train_context() const { return config.train_context; }

  nn::Matrix predict(const nn::Matrix& x_t, const nn::Matrix& x_a, const nn::Matrix& e_a) const {
    ACARecCache<float> cache;
    return acarec_forward(x_t, x_a, e_a, params, config, cache);
  }

  double accumulate(const nn::Matrix& x_t, const nn::Matrix& x_a, const nn::Matrix& e_a,
                    std::span<const float> target, double scale, Params& grads) const {
    ACARecCache<float> cache;
    const auto out = acarec_forward(x_t, x_a, e_a, params, config, cache);
    nn::Matrix dout;
    const double loss = detail::squared_error_grad(out, target, scale, dout);
    acarec_backward(cache, params, config, dout, grads);
    return loss;
  }

  nlohmann::json config_json() const { return to_json(config); }
};

class DeepMusicModel {
 public:
  using Params = DeepMusicParams<float>;
  DeepMusicConfig config;
  Params params;

  static DeepMusicModel create(const DeepMusicConfig& c, std::uint64_t seed) {
    Rng rng = make_rng(seed, 7);
    return {c, Params::init(c, rng)};
  }

  std::string method() const { return config.artist_mean ? "deepmusic+am" : "deepmusic"; }
  // The artist variant averages every other track by the artist.
  std::size_t train_context() const { return config.artist_mean ? kWholeCatalog : 0; }

  nn::Matrix input(const nn::Matrix& x_t, const nn::Matrix& e_a) const {
    return config.artist_mean ? nn::hconcat(x_t, artist_mean(e_a)) : x_t;
  }

  nn::Matrix predict(const nn::Matrix& x_t, const nn::Matrix&, const nn::Matrix& e_a) const {
    DeepMusicCache<float> cache;
    return deepmusic_forward(input(x_t, e_a), params, cache);
  }

  double accumulate(const nn::Matrix& x_t, const nn::Matrix&, const nn::Matrix& e_a,
                    std::span<const float> target, double scale, Params& grads) const {
    DeepMusicCache<float> cache;
    const auto out = deepmusic_forward(input(x_t, e_a), params, cache);
    nn::Matrix dout;
    const double loss = detail::squared_error_grad(out, target, scale, dout);
    deepmusic_backward(cache, params, dout, grads);
    return loss;
  }

  nlohmann::json config_json() const { return to_json(config); }
};

struct ColdTrainConfig {
  double learning_rate = 2e-3;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 40;
  std::size_t patience = 5;
  std::size_t eval_k = 20;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(learning_rate > 0)) fail(ErrorKind::Config, "train.learning_rate must be positive");
    if (batch_size == 0) fail(ErrorKind::Config, "train.batch_size must be positive");
    if (max_epochs == 0) fail(ErrorKind::Config, "train.max_epochs must be positive");
    if (eval_k == 0) fail(ErrorKind::Config, "train.eval_k must be positive");
  }
};

struct ColdTrainHistory {
  double initial_loss = 0;        // mean loss of the untrained model
  std::vector<double> loss;       // mean training loss per epoch
  std::vector<double> val_ndcg;   // Overall validation NDCG@k per epoch
  std::size_t best_epoch = 0;     // 0: the untrained model was never beaten
  double best_ndcg = -1;
};

// Called with every training target and the context sampled for it.
using ContextObserver = std::function<void(Index target, std::span<const Index> context)>;

template <class Model>
std::vector<Index> training_targets(const Model& m, const data::DatasetBundle& b) {
  std::vector<Index> out;
  for (Index h = 0; h < b.num_hot; ++h)
    if (m.train_context() == 0 || b.artist_catalog[b.artist_of[h]].size() >= 2) out.push_back(h);
  if (out.empty()) fail(ErrorKind::Untrainable, "no hot item has a same-artist sibling to form a context");
  return out;
}

template <class Model>
nn::Matrix infer_cold_embeddings(const Model& m, const data::DatasetBundle& b, const cf::CFEmbeddings& cf,
                                 std::span<const Index> items, ContextMode mode = ContextMode::full()) {
  if (m.train_context() != 0) require_hot_artists(b, items);
  nn::Matrix out(items.size(), cf.dim());
  for (std::size_t r = 0; r < items.size(); ++r) {
    const Index item = items[r];
    std::vector<Index> ctx;
    if (m.train_context() != 0) ctx = inference_context(b, item, mode);
    const auto x_t = nn::gather_rows(b.content, std::span<const Index>(&item, 1));
    const auto e = m.predict(x_t, nn::gather_rows(b.content, std::span<const Index>(ctx)),
                             nn::gather_rows(cf.E, std::span<const Index>(ctx)));
    std::copy(e.flat().begin(), e.flat().end(), out.row(r).begin());
  }
  return out;
}

template <class Model>
double validation_ndcg(const Model& m, const data::DatasetBundle& b, const cf::CFEmbeddings& cf, std::size_t k) {
  const auto val = b.cold_val_items();
  const auto e = infer_cold_embeddings(m, b, cf, val);
  return eval::evaluate_embeddings(b, b.val_interactions, val, cf.P, e, k).at(eval::Split::Overall).ndcg;
}

namespace detail {
// Runs `f(target, context)` over `targets` in order, drawing each context
// from the target's artist catalog without the target itself.
template <class Model, class F>
void for_each_sample(const Model& m, const data::DatasetBundle& b, std::span<const Index> targets, Rng& rng, F&& f) {
  for (Index h : targets) {
    std::vector<Index> ctx;
    if (m.train_context() != 0) {
      auto sampled = data::sample_context(b.artist_catalog[b.artist_of[h]], h, m.train_context(), rng);
      if (!sampled) fail(ErrorKind::EmptyContext, "training target " + b.items[h] + " has no context");
      ctx = std::move(*sampled);
    }
    f(h, ctx);
  }
}
}  // namespace detail

// Reconstruction training with target withholding and early stopping on
// validation NDCG. On return `m.params` holds the best validated weights.
template <class Model>
ColdTrainHistory train_cold(Model& m, const data::DatasetBundle& b, const cf::CFEmbeddings& cf,
                            const ColdTrainConfig& tc, const ContextObserver& observe = {}) {
  tc.validate();
  nn::require(cf.E.rows() == b.num_hot && cf.P.rows() == b.num_users(), "cf embeddings do not match the bundle");
  auto targets = training_targets(m, b);
  Rng rng = make_rng(tc.seed, 8);
  ColdTrainHistory hist;

  auto sample_loss = [&](Index h, const std::vector<Index>& ctx, double scale, typename Model::Params* grads) {
    const auto x_t = nn::gather_rows(b.content, std::span<const Index>(&h, 1));
    const auto x_a = nn::gather_rows(b.content, std::span<const Index>(ctx));
    const auto e_a = nn::gather_rows(cf.E, std::span<const Index>(ctx));
    if (grads) return m.accumulate(x_t, x_a, e_a, cf.E.row(h), scale, *grads);
    const auto out = m.predict(x_t, x_a, e_a);
    double loss = 0;
    for (std::size_t j = 0; j < out.cols(); ++j) {
      const double d = double(out[j]) - cf.E(h, j);
      loss += d * d;
    }
    return loss;
  };

  {
    Rng probe = make_rng(tc.seed, 9);
    double total = 0;
    detail::for_each_sample(m, b, targets, probe,
                            [&](Index h, const std::vector<Index>& ctx) { total += sample_loss(h, ctx, 0, nullptr); });
    hist.initial_loss = total / static_cast<double>(targets.size());
  }

  nn::Adam<float> adam({tc.learning_rate});
  auto grads = nn::zeros_like(m.params);
  auto best = m.params;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= tc.max_epochs; ++epoch) {
    shuffle(targets, rng);
    double total = 0;
    for (std::size_t start = 0; start < targets.size(); start += tc.batch_size) {
      const std::size_t end = std::min(targets.size(), start + tc.batch_size);
      const double scale = 1.0 / static_cast<double>(end - start);
      nn::set_zero(grads);
      detail::for_each_sample(m, b, std::span<const Index>(targets).subspan(start, end - start), rng,
                              [&](Index h, const std::vector<Index>& ctx) {
                                if (observe) observe(h, ctx);
                                total += sample_loss(h, ctx, scale, &grads);
                              });
      adam.step(m.params, grads);
    }
    const double loss = total / static_cast<double>(targets.size());
    if (!std::isfinite(loss)) fail(ErrorKind::Divergence, m.method() + " training loss diverged at epoch " + std::to_string(epoch));
    hist.loss.push_back(loss);
    const double ndcg = validation_ndcg(m, b, cf, tc.eval_k);
    hist.val_ndcg.push_back(ndcg);
    if (ndcg > hist.best_ndcg) {
      hist.best_ndcg = ndcg;
      hist.best_epoch = epoch;
      best = m.params;
      since_best = 0;
    } else if (tc.patience > 0 && ++since_best >= tc.patience) {
      break;
    }
  }
  m.params = std::move(best);
  return hist;
}

// ---------------------------------------------------------------------------
// Checkpoints.

template <class Model>
void save_model(const std::filesystem::path& dir, const Model& m, const std::string& fingerprint,
                const nlohmann::json& extra = nlohmann::json::object()) {
  nn::save_checkpoint(dir, m.params,
                      {{"kind", m.method()}, {"config", m.config_json()}, {"bundle_fingerprint", fingerprint},
                       {"train", extra}});
}

inline nlohmann::json read_model_meta(const std::filesystem::path& dir, const std::string& fingerprint) {
  auto meta = nn::read_checkpoint_meta(dir);
  cf::require_fingerprint(meta, fingerprint, "model checkpoint " + dir.string());
  return meta;
}

inline ACARecModel load_acarec(const std::filesystem::path& dir, const std::string& fingerprint) {
  const auto meta = read_model_meta(dir, fingerprint);
  if (meta.value("kind", "") != "acarec") fail(ErrorKind::Parse, dir.string() + " is not an acarec checkpoint");
  auto m = ACARecModel::create(acarec_config_from_json(meta.at("config")), 0);
  nn::load_checkpoint(dir, m.params);
  return m;
}

inline DeepMusicModel load_deepmusic(const std::filesystem::path& dir, const std::string& fingerprint) {
  const auto meta = read_model_meta(dir, fingerprint);
  const auto kind = meta.value("kind", "");
  if (kind != "deepmusic" && kind != "deepmusic+am")
    fail(ErrorKind::Parse, dir.string() + " is not a deepmusic checkpoint");
  auto m = DeepMusicModel::create(deepmusic_config_from_json(meta.at("config")), 0);
  nn::load_checkpoint(dir, m.params);
  return m;
}

}  // namespace acarec::coldstart
