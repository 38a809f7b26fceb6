#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acarec/cf/bpr.hpp"
#include "acarec/data/bundle.hpp"
#include "acarec/data/sampling.hpp"
#include "acarec/eval/evaluate.hpp"
#include "acarec/nn/matrix.hpp"

namespace acarec::coldstart {

using data::Index;

inline constexpr double kNormFloor = 1e-12;

template <class T>
void require_context(const nn::BasicMatrix<T>& e_a) {
  if (e_a.rows() == 0) fail(ErrorKind::EmptyContext, "empty artist context");
}

// Weighted sum of context rows; weights must have one entry per row.
template <class T>
nn::BasicMatrix<T> weighted_rows(const nn::BasicMatrix<T>& e_a, const std::vector<double>& w) {
  nn::BasicMatrix<T> out(1, e_a.cols());
  for (std::size_t j = 0; j < e_a.cols(); ++j) {
    double acc = 0;
    for (std::size_t i = 0; i < e_a.rows(); ++i) acc += w[i] * static_cast<double>(e_a(i, j));
    out[j] = static_cast<T>(acc);
  }
  return out;
}

template <class T>
nn::BasicMatrix<T> artist_mean(const nn::BasicMatrix<T>& e_a) {
  require_context(e_a);
  return nn::column_mean(e_a);
}

// Weights ln pop(j) / sum_i ln pop(i); uniform when every pop is 1.
template <class T>
nn::BasicMatrix<T> artist_mean_pop(const nn::BasicMatrix<T>& e_a, std::span<const std::uint32_t> pops) {
  require_context(e_a);
  nn::require(pops.size() == e_a.rows(), "artist_mean_pop: " + std::to_string(pops.size()) +
                                             " popularities for " + std::to_string(e_a.rows()) + " rows");
  std::vector<double> w(pops.size());
  double total = 0;
  for (std::size_t i = 0; i < pops.size(); ++i) {
    if (pops[i] == 0) fail(ErrorKind::Contract, "artist_mean_pop: popularity must be at least 1");
    w[i] = std::log(static_cast<double>(pops[i]));
    total += w[i];
  }
  if (total == 0) return artist_mean(e_a);
  for (auto& x : w) x /= total;
  return weighted_rows(e_a, w);
}

template <class T>
double cosine(std::span<const T> a, std::span<const T> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ab += double(a[k]) * b[k];
    aa += double(a[k]) * a[k];
    bb += double(b[k]) * b[k];
  }
  return ab / (std::max(std::sqrt(aa), kNormFloor) * std::max(std::sqrt(bb), kNormFloor));
}

// softmax(cos(x_j, x_t) / tau) weighted mean.
template <class T>
std::vector<double> contsim_weights(const nn::BasicMatrix<T>& x_a, std::span<const T> x_t, double tau) {
  if (!(tau > 0)) fail(ErrorKind::Config, "contsim temperature must be positive");
  std::vector<double> w(x_a.rows());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.size(); ++i) {
    w[i] = cosine<T>(x_a.row(i), x_t) / tau;
    top = std::max(top, w[i]);
  }
  double z = 0;
  for (auto& x : w) z += (x = std::exp(x - top));
  for (auto& x : w) x /= z;
  return w;
}

template <class T>
nn::BasicMatrix<T> artist_mean_contsim(const nn::BasicMatrix<T>& e_a, const nn::BasicMatrix<T>& x_a,
                                       std::span<const T> x_t, double tau) {
  require_context(e_a);
  nn::require(x_a.rows() == e_a.rows(), "artist_mean_contsim: content and embedding rows differ");
  nn::require(x_a.cols() == x_t.size(), "artist_mean_contsim: content width mismatch");
  return weighted_rows(e_a, contsim_weights(x_a, x_t, tau));
}

// ---------------------------------------------------------------------------
// Bundle-level plumbing shared by every cold-start method.

struct ContextMode {
  std::size_t top_n = 0;  // 0: the artist's full hot catalog

  static ContextMode full() { return {}; }
  static ContextMode top(std::size_t n) {
    if (n == 0) fail(ErrorKind::Config, "TopN context needs n >= 1");
    return {n};
  }
};

// The inference context of a cold item: its artist's hot catalog, or the
// `top_n` most popular tracks of it.
inline std::vector<Index> inference_context(const data::DatasetBundle& b, Index item, ContextMode mode) {
  const auto& catalog = b.artist_catalog[b.artist_of[item]];
  if (mode.top_n == 0) return catalog;
  return data::top_n_by_popularity(catalog, b.popularity, mode.top_n);
}

// Cold items whose artist has no hot track cannot be handled; all of them are
// listed in the error.
inline void require_hot_artists(const data::DatasetBundle& b, std::span<const Index> items) {
  std::string bad;
  std::size_t count = 0;
  for (Index i : items) {
    if (!b.artist_catalog[b.artist_of[i]].empty()) continue;
    if (count++ < 10) bad += (bad.empty() ? "" : ", ") + b.items[i];
  }
  if (count)
    fail(ErrorKind::EmptyContext, std::to_string(count) + " item(s) by artists without hot tracks: " + bad +
                                      (count > 10 ? ", ..." : ""));
}

enum class Heuristic { ArtistMean, ArtistMeanPop, ArtistMeanContSim };

inline nn::Matrix heuristic_embeddings(Heuristic kind, const data::DatasetBundle& b, const cf::CFEmbeddings& cf,
                                       std::span<const Index> items, double tau = 0.1,
                                       ContextMode mode = ContextMode::full()) {
  require_hot_artists(b, items);
  nn::Matrix out(items.size(), cf.dim());
  for (std::size_t r = 0; r < items.size(); ++r) {
    const auto ctx = inference_context(b, items[r], mode);
    const auto e_a = nn::gather_rows(cf.E, std::span<const Index>(ctx));
    nn::Matrix e;
    switch (kind) {
      case Heuristic::ArtistMean: e = artist_mean(e_a); break;
      case Heuristic::ArtistMeanPop: {
        std::vector<std::uint32_t> pops;
        for (Index j : ctx) pops.push_back(b.popularity[j]);
        e = artist_mean_pop(e_a, std::span<const std::uint32_t>(pops));
        break;
      }
      case Heuristic::ArtistMeanContSim: {
        for (Index j : ctx)
          if (nn::dot(b.content.row(j), b.content.row(j)) == 0.0f)
            fail(ErrorKind::Contract, "zero content vector for item " + b.items[j]);
        if (nn::dot(b.content.row(items[r]), b.content.row(items[r])) == 0.0f)
          fail(ErrorKind::Contract, "zero content vector for item " + b.items[items[r]]);
        e = artist_mean_contsim(e_a, nn::gather_rows(b.content, std::span<const Index>(ctx)),
                                b.content.row(items[r]), tau);
        break;
      }
    }
    std::copy(e.flat().begin(), e.flat().end(), out.row(r).begin());
  }
  return out;
}

inline const std::vector<double>& default_tau_grid() {
  static const std::vector<double> grid = {0.01, 0.03, 0.1, 0.3, 1.0};
  return grid;
}

// Temperature with the best Overall validation NDCG@k; ties keep the
// earlier grid value.
inline double tune_tau(const data::DatasetBundle& b, const cf::CFEmbeddings& cf, const std::vector<double>& grid,
                       std::size_t k = 20) {
  if (grid.empty()) fail(ErrorKind::Config, "tau grid is empty");
  const auto val = b.cold_val_items();
  double best_tau = grid.front(), best = -1;
  for (double tau : grid) {
    const auto e = heuristic_embeddings(Heuristic::ArtistMeanContSim, b, cf, val, tau);
    const double ndcg = eval::evaluate_embeddings(b, b.val_interactions, val, cf.P, e, k).at(eval::Split::Overall).ndcg;
    if (ndcg > best) {
      best = ndcg;
      best_tau = tau;
    }
  }
  return best_tau;
}

// ---------------------------------------------------------------------------
// Personalized artist filtering.

struct PafIndex {
  std::vector<std::map<Index, std::uint32_t>> user_artist;  // train counts
  std::vector<std::uint64_t> artist_popularity;             // train interactions per artist

  explicit PafIndex(const data::DatasetBundle& b)
      : user_artist(b.user_artist_counts()), artist_popularity(b.num_artists(), 0) {
    for (const auto& [u, i] : b.train) ++artist_popularity[b.artist_of[i]];
  }
};

// Candidates by artists the user knows, ordered by the user's count for the
// artist, then artist popularity (both descending), then item index.
inline std::vector<Index> paf_rank(Index user, std::span<const Index> candidates, const data::DatasetBundle& b,
                                   const PafIndex& index) {
  const auto& counts = index.user_artist.at(user);
  struct Key {
    std::uint32_t count;
    std::uint64_t pop;
    Index item;
  };
  std::vector<Key> keys;
  for (Index c : candidates) {
    const auto it = counts.find(b.artist_of[c]);
    if (it == counts.end()) continue;
    keys.push_back({it->second, index.artist_popularity[b.artist_of[c]], c});
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& c) {
    if (a.count != c.count) return a.count > c.count;
    if (a.pop != c.pop) return a.pop > c.pop;
    return a.item < c.item;
  });
  std::vector<Index> out;
  out.reserve(keys.size());
  for (const auto& k : keys) out.push_back(k.item);
  return out;
}

// PAF only recommends tracks by known artists, so it has no Discovery ranking.
inline eval::Ranker paf_ranker(const data::DatasetBundle& b) {
  auto index = std::make_shared<PafIndex>(b);
  return [&b, index](Index u, eval::Split s, std::span<const Index> candidates,
                     std::size_t k) -> std::optional<std::vector<Index>> {
    if (s == eval::Split::Discovery) return std::nullopt;
    auto ranked = paf_rank(u, candidates, b, *index);
    if (ranked.size() > k) ranked.resize(k);
    return ranked;
  };
}

}  // namespace acarec::coldstart
