#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "acarec/data/bundle.hpp"
#include "acarec/eval/metrics.hpp"
#include "acarec/nn/adam.hpp"
#include "acarec/nn/checkpoint.hpp"
#include "acarec/nn/matrix.hpp"
#include "acarec/nn/random.hpp"
#include "json.hpp"

namespace acarec::cf {

using data::Index;

// User and hot-item embeddings of the warm model; score(u, i) = P[u] . E[i].
struct CFEmbeddings {
  using scalar_type = float;
  nn::Matrix P;
  nn::Matrix E;

  std::size_t dim() const { return P.cols(); }

  template <class F>
  void visit(F&& f) {
    f("P", P);
    f("E", E);
  }
  template <class F>
  void visit(F&& f) const {
    f("P", P);
    f("E", E);
  }
};

struct BPRConfig {
  std::size_t dim = 32;
  double learning_rate = 1e-2;
  double l2 = 3e-2;
  std::size_t epochs = 100;  // upper bound; early stopping usually ends sooner
  std::size_t negatives = 1;
  std::size_t batch_size = 1024;
  std::size_t patience = 5;
  std::size_t eval_k = 50;
  double init_std = 0.1;
  std::uint64_t seed = 0;

  void validate() const {
    if (dim == 0) fail(ErrorKind::Config, "cf.dim must be positive");
    if (!(learning_rate > 0)) fail(ErrorKind::Config, "cf.learning_rate must be positive");
    if (l2 < 0) fail(ErrorKind::Config, "cf.l2 must be non-negative");
    if (epochs == 0) fail(ErrorKind::Config, "cf.epochs must be positive");
    if (negatives == 0) fail(ErrorKind::Config, "cf.negatives must be positive");
    if (batch_size == 0) fail(ErrorKind::Config, "cf.batch_size must be positive");
    if (eval_k == 0) fail(ErrorKind::Config, "cf.eval_k must be positive");
    if (!(init_std > 0)) fail(ErrorKind::Config, "cf.init_std must be positive");
  }
};

inline double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

// -ln sigmoid(p.(e_i - e_j)) + l2 (|p|^2 + |e_i|^2 + |e_j|^2). When gradient
// spans are given, `scale` times the gradient is added to them.
template <class T>
double bpr_loss(std::span<const T> p, std::span<const T> ei, std::span<const T> ej, double l2,
                std::span<T> gp = {}, std::span<T> gi = {}, std::span<T> gj = {}, double scale = 1.0) {
  double x = 0, reg = 0;
  for (std::size_t k = 0; k < p.size(); ++k) {
    x += double(p[k]) * (double(ei[k]) - double(ej[k]));
    reg += double(p[k]) * p[k] + double(ei[k]) * ei[k] + double(ej[k]) * ej[k];
  }
  const double loss = softplus(-x) + l2 * reg;
  if (!gp.empty()) {
    const double d = -nn::sigmoid(-x) * scale;  // dloss/dx
    const double r = 2 * l2 * scale;
    for (std::size_t k = 0; k < p.size(); ++k) {
      const double pk = p[k], ik = ei[k], jk = ej[k];
      gp[k] += static_cast<T>(d * (ik - jk) + r * pk);
      gi[k] += static_cast<T>(d * pk + r * ik);
      gj[k] += static_cast<T>(-d * pk + r * jk);
    }
  }
  return loss;
}

inline float score(const CFEmbeddings& cf, Index u, Index i) {
  if (u >= cf.P.rows() || i >= cf.E.rows())
    fail(ErrorKind::Contract, "score: index out of range (user " + std::to_string(u) + " of " +
                                  std::to_string(cf.P.rows()) + ", item " + std::to_string(i) + " of " +
                                  std::to_string(cf.E.rows()) + ")");
  return nn::dot(cf.P.row(u), cf.E.row(i));
}

inline CFEmbeddings init_embeddings(std::size_t users, std::size_t items, const BPRConfig& c, Rng& rng) {
  CFEmbeddings cf{nn::Matrix(users, c.dim), nn::Matrix(items, c.dim)};
  for (auto& v : cf.P.flat()) v = static_cast<float>(normal(rng, 0.0, c.init_std));
  for (auto& v : cf.E.flat()) v = static_cast<float>(normal(rng, 0.0, c.init_std));
  return cf;
}

// Uniform over the items a user has not interacted with; `positives` is
// sorted. Rejection sampling is fine as long as users touch a small share of
// the catalog, which the caller checks.
inline Index sample_negative(std::span<const Index> positives, std::size_t num_items, Rng& rng) {
  while (true) {
    const auto j = static_cast<Index>(uniform_index(rng, num_items));
    if (!std::binary_search(positives.begin(), positives.end(), j)) return j;
  }
}

struct Holdout {
  std::vector<std::vector<Index>> fit;          // per user, sorted
  std::vector<std::pair<Index, Index>> pairs;   // one (user, item) per eligible user
};

// Holds out one random positive per user that has at least two.
inline Holdout holdout_one_per_user(const std::vector<std::vector<Index>>& user_items, Rng& rng) {
  Holdout h;
  h.fit = user_items;
  for (Index u = 0; u < user_items.size(); ++u) {
    auto& items = h.fit[u];
    if (items.size() < 2) continue;
    const auto pos = uniform_index(rng, items.size());
    h.pairs.emplace_back(u, items[pos]);
    items.erase(items.begin() + static_cast<std::ptrdiff_t>(pos));
  }
  return h;
}

// Mean NDCG@k of each held-out item ranked against every hot item the user
// has not been fitted on.
inline double heldout_ndcg(const CFEmbeddings& cf, const Holdout& h, std::size_t k) {
  if (h.pairs.empty()) return 0;
  const std::size_t n = cf.E.rows();
  std::vector<Index> cands;
  std::vector<float> scores;
  double total = 0;
  for (const auto& [u, target] : h.pairs) {
    const auto& fit = h.fit[u];
    cands.clear();
    scores.clear();
    const auto pu = cf.P.row(u);
    for (Index i = 0; i < n; ++i) {
      if (std::binary_search(fit.begin(), fit.end(), i)) continue;
      cands.push_back(i);
      scores.push_back(nn::dot(pu, cf.E.row(i)));
    }
    const auto top = eval::rank_topk(cands, std::span<const float>(scores), k);
    const Index rel[1] = {target};
    total += eval::metrics_at_k(top.items, rel, k).ndcg;
  }
  return total / static_cast<double>(h.pairs.size());
}

// Pairwise AUC of held-out positives against every item the user has never
// interacted with (`all_items` per user, sorted); ties count one half.
inline double heldout_auc(const CFEmbeddings& cf, const std::vector<std::pair<Index, Index>>& pairs,
                          const std::vector<std::vector<Index>>& all_items) {
  const std::size_t n = cf.E.rows();
  double total = 0;
  std::size_t counted = 0;
  for (const auto& [u, target] : pairs) {
    const double s = score(cf, u, target);
    const auto& seen = all_items[u];
    double wins = 0;
    std::size_t negatives = 0;
    for (Index j = 0; j < n; ++j) {
      if (std::binary_search(seen.begin(), seen.end(), j)) continue;
      const double sj = score(cf, u, j);
      wins += s > sj ? 1.0 : (s == sj ? 0.5 : 0.0);
      ++negatives;
    }
    if (negatives == 0) continue;
    total += wins / static_cast<double>(negatives);
    ++counted;
  }
  return counted ? total / static_cast<double>(counted) : 0.5;
}

// One pass over every (user, positive) pair in shuffled order with
// `negatives` sampled negatives each. Returns the mean loss.
inline double bpr_epoch(CFEmbeddings& cf, const std::vector<std::vector<Index>>& fit, const BPRConfig& c,
                        nn::Adam<float>& adam, CFEmbeddings& grads, Rng& rng) {
  std::vector<std::pair<Index, Index>> pairs;
  for (Index u = 0; u < fit.size(); ++u)
    for (Index i : fit[u]) pairs.emplace_back(u, i);
  shuffle(pairs, rng);
  const std::size_t n = cf.E.rows();
  double total = 0;
  std::size_t terms = 0;
  for (std::size_t start = 0; start < pairs.size(); start += c.batch_size) {
    const std::size_t end = std::min(pairs.size(), start + c.batch_size);
    const double scale = 1.0 / static_cast<double>((end - start) * c.negatives);
    grads.P.set_zero();
    grads.E.set_zero();
    for (std::size_t b = start; b < end; ++b) {
      const auto [u, i] = pairs[b];
      for (std::size_t s = 0; s < c.negatives; ++s) {
        const Index j = sample_negative(fit[u], n, rng);
        const double loss = bpr_loss<float>(cf.P.row(u), cf.E.row(i), cf.E.row(j), c.l2, grads.P.row(u),
                                            grads.E.row(i), grads.E.row(j), scale);
        if (!std::isfinite(loss))
          fail(ErrorKind::Divergence, "bpr loss is not finite (user " + std::to_string(u) + ", item " +
                                          std::to_string(i) + ", negative " + std::to_string(j) + ")");
        total += loss;
        ++terms;
      }
    }
    adam.step(cf, grads);
  }
  return terms ? total / static_cast<double>(terms) : 0.0;
}

struct BPRHistory {
  std::vector<double> loss;      // mean training loss per epoch, holdout phase
  std::vector<double> val_ndcg;  // held-out NDCG@k per epoch
  std::size_t best_epochs = 0;
  double best_ndcg = 0;
};

struct BPRResult {
  CFEmbeddings embeddings;
  BPRHistory history;
};

// Fits on `fit` for up to `max_epochs`, tracking held-out NDCG. With
// `patience` > 0 it stops after that many epochs without improvement.
inline CFEmbeddings fit_bpr(const std::vector<std::vector<Index>>& fit, std::size_t num_items, const BPRConfig& c,
                            std::size_t max_epochs, const Holdout* holdout, BPRHistory* history, std::uint64_t stream) {
  Rng rng = make_rng(c.seed, stream);
  auto cf = init_embeddings(fit.size(), num_items, c, rng);
  for (const auto& items : fit)
    if (items.size() * 2 > num_items)
      fail(ErrorKind::Untrainable, "a user interacted with more than half of all hot items; negative sampling is impractical");
  nn::Adam<float> adam({c.learning_rate});
  CFEmbeddings grads = nn::zeros_like(cf);
  CFEmbeddings best = cf;
  std::size_t since_best = 0;
  for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
    const double loss = bpr_epoch(cf, fit, c, adam, grads, rng);
    if (history) history->loss.push_back(loss);
    if (!holdout) continue;
    const double ndcg = heldout_ndcg(cf, *holdout, c.eval_k);
    history->val_ndcg.push_back(ndcg);
    if (ndcg > history->best_ndcg || history->best_epochs == 0) {
      history->best_ndcg = ndcg;
      history->best_epochs = epoch;
      best = cf;
      since_best = 0;
    } else if (++since_best >= c.patience) {
      break;
    }
  }
  return holdout ? best : cf;
}

// Early stopping picks the epoch count on a one-per-user holdout; the held
// out pairs then return to train and the final model is refitted for that
// many epochs.
inline BPRResult train_bpr(const data::DatasetBundle& b, const BPRConfig& c) {
  c.validate();
  if (b.train.empty()) fail(ErrorKind::Untrainable, "train split is empty");
  const auto user_items = b.user_items();
  Rng split_rng = make_rng(c.seed, 1);
  const auto h = holdout_one_per_user(user_items, split_rng);
  BPRResult r;
  fit_bpr(h.fit, b.num_hot, c, c.epochs, &h, &r.history, 2);
  r.embeddings = fit_bpr(user_items, b.num_hot, c, r.history.best_epochs, nullptr, nullptr, 3);
  return r;
}

inline void save_cf(const std::filesystem::path& dir, const CFEmbeddings& cf, const std::string& fingerprint,
                    const nlohmann::json& config) {
  nn::save_checkpoint(dir, cf,
                      {{"kind", "cf"}, {"dim", cf.dim()}, {"bundle_fingerprint", fingerprint}, {"config", config}});
}

inline void require_fingerprint(const nlohmann::json& meta, const std::string& expected, const std::string& what) {
  const auto got = meta.value("bundle_fingerprint", std::string());
  if (got != expected)
    fail(ErrorKind::Fingerprint, what + " was trained on bundle " + got + " but the bundle is " + expected);
}

inline CFEmbeddings load_cf(const std::filesystem::path& dir, const data::DatasetBundle& b,
                            const std::string& fingerprint) {
  const auto meta = nn::read_checkpoint_meta(dir);
  if (meta.value("kind", "") != "cf") fail(ErrorKind::Parse, dir.string() + " is not a cf checkpoint");
  require_fingerprint(meta, fingerprint, "cf checkpoint " + dir.string());
  const auto d = meta.at("dim").get<std::size_t>();
  CFEmbeddings cf{nn::Matrix(b.num_users(), d), nn::Matrix(b.num_hot, d)};
  nn::load_checkpoint(dir, cf);
  return cf;
}

}  // namespace acarec::cf
