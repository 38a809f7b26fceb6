#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "acarec/error.hpp"

namespace acarec::eval {

using Index = std::uint32_t;

struct Ranking {
  std::vector<Index> items;
  std::vector<float> scores;
};

// Top-k of `candidates` by score, ties to the lower item index.
// `scores[i]` belongs to `candidates[i]`.
inline Ranking rank_topk(std::span<const Index> candidates, std::span<const float> scores, std::size_t k) {
  if (candidates.size() != scores.size())
    fail(ErrorKind::Dimension, "rank_topk: " + std::to_string(candidates.size()) + " candidates but " +
                                   std::to_string(scores.size()) + " scores");
  std::vector<std::uint32_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0u);
  auto before = [&](std::uint32_t a, std::uint32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return candidates[a] < candidates[b];
  };
  const std::size_t n = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(), before);
  Ranking r;
  r.items.reserve(n);
  r.scores.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    r.items.push_back(candidates[order[i]]);
    r.scores.push_back(scores[order[i]]);
  }
  return r;
}

template <class Scorer>
  requires std::invocable<Scorer&, Index>
Ranking rank_topk(std::span<const Index> candidates, Scorer&& score, std::size_t k) {
  std::vector<float> s(candidates.size());
  for (std::size_t i = 0; i < candidates.size(); ++i) s[i] = static_cast<float>(score(candidates[i]));
  return rank_topk(candidates, std::span<const float>(s), k);
}

struct Metrics {
  double hr = 0;
  double recall = 0;
  double ndcg = 0;
  std::size_t hits = 0;
};

inline double rank_discount(std::size_t rank) { return 1.0 / std::log2(static_cast<double>(rank) + 1.0); }

// Binary-relevance HR, Recall and NDCG of a top-k list. `relevant` must be
// sorted and nonempty.
inline Metrics metrics_at_k(std::span<const Index> ranked, std::span<const Index> relevant, std::size_t k) {
  if (relevant.empty()) fail(ErrorKind::Contract, "metrics_at_k: empty relevant set");
  Metrics m;
  double dcg = 0;
  const std::size_t n = std::min(k, ranked.size());
  for (std::size_t r = 0; r < n; ++r) {
    if (std::binary_search(relevant.begin(), relevant.end(), ranked[r])) {
      ++m.hits;
      dcg += rank_discount(r + 1);
    }
  }
  double idcg = 0;
  for (std::size_t r = 1; r <= std::min(k, relevant.size()); ++r) idcg += rank_discount(r);
  m.hr = m.hits > 0 ? 1.0 : 0.0;
  m.recall = static_cast<double>(m.hits) / static_cast<double>(relevant.size());
  m.ndcg = idcg > 0 ? dcg / idcg : 0.0;
  return m;
}

}  // namespace acarec::eval
