#pragma once

#include <array>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "acarec/data/bundle.hpp"
#include "acarec/eval/metrics.hpp"
#include "acarec/nn/matrix.hpp"

namespace acarec::eval {

enum class Split { Overall, Discovery, Exploit };
inline constexpr std::array<Split, 3> kSplits = {Split::Overall, Split::Discovery, Split::Exploit};

inline std::string_view to_string(Split s) {
  switch (s) {
    case Split::Overall: return "overall";
    case Split::Discovery: return "discovery";
    case Split::Exploit: return "exploit";
  }
  return "?";
}

struct SplitMetrics {
  bool present = true;  // false when the method cannot rank this split
  std::size_t users = 0;
  double hr = 0;
  double recall = 0;
  double ndcg = 0;
};

struct UserEval {
  Index user = 0;
  std::array<std::optional<Metrics>, 3> metrics;
  std::vector<Index> overall_topk;
  std::vector<Index> overall_relevant;  // sorted
};

struct MetricsReport {
  std::size_t k = 20;
  std::array<SplitMetrics, 3> splits;
  std::vector<UserEval> users;  // ascending user index

  const SplitMetrics& at(Split s) const { return splits[static_cast<std::size_t>(s)]; }
  SplitMetrics& at(Split s) { return splits[static_cast<std::size_t>(s)]; }
};

// Returns the top-k of `candidates` for a user, or nullopt if the method does
// not produce rankings for that split.
using Ranker = std::function<std::optional<std::vector<Index>>(Index user, Split split,
                                                                std::span<const Index> candidates, std::size_t k)>;

// Sorted distinct artists per user from train.
inline std::vector<std::vector<Index>> known_artists(const data::DatasetBundle& b) {
  std::vector<std::vector<Index>> out(b.num_users());
  for (const auto& [u, i] : b.train) out[u].push_back(b.artist_of[i]);
  for (auto& v : out) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  }
  return out;
}

// Ranks the cold items in `candidates` for every user appearing in
// `interactions` and averages the metrics per split over users with at
// least one relevant item in that split.
inline MetricsReport evaluate(const data::DatasetBundle& b, const std::vector<data::EvalInteraction>& interactions,
                              std::span<const Index> candidates, const Ranker& ranker, std::size_t k) {
  if (k == 0) fail(ErrorKind::Config, "evaluation cutoff k must be positive");
  MetricsReport report;
  report.k = k;
  const auto artists = known_artists(b);

  std::vector<std::array<std::vector<Index>, 3>> relevant(b.num_users());
  std::vector<bool> active(b.num_users(), false);
  for (const auto& x : interactions) {
    active[x.user] = true;
    relevant[x.user][0].push_back(x.item);
    relevant[x.user][x.label == data::SplitLabel::Discovery ? 1 : 2].push_back(x.item);
  }

  std::array<bool, 3> supported = {true, true, true};
  std::vector<Index> discovery, exploit;
  for (Index u = 0; u < b.num_users(); ++u) {
    if (!active[u]) continue;
    UserEval ue;
    ue.user = u;
    discovery.clear();
    exploit.clear();
    for (Index c : candidates) {
      const bool known = std::binary_search(artists[u].begin(), artists[u].end(), b.artist_of[c]);
      (known ? exploit : discovery).push_back(c);
    }
    for (Split s : kSplits) {
      const auto si = static_cast<std::size_t>(s);
      auto& rel = relevant[u][si];
      if (rel.empty()) continue;
      std::sort(rel.begin(), rel.end());
      const std::span<const Index> pool = s == Split::Overall     ? candidates
                                          : s == Split::Discovery ? std::span<const Index>(discovery)
                                                                  : std::span<const Index>(exploit);
      auto top = ranker(u, s, pool, k);
      if (!top) {
        supported[si] = false;
        continue;
      }
      const auto m = metrics_at_k(*top, rel, k);
      ue.metrics[si] = m;
      auto& agg = report.splits[si];
      ++agg.users;
      agg.hr += m.hr;
      agg.recall += m.recall;
      agg.ndcg += m.ndcg;
      if (s == Split::Overall) {
        ue.overall_topk = std::move(*top);
        ue.overall_relevant = rel;
      }
    }
    report.users.push_back(std::move(ue));
  }
  for (std::size_t si = 0; si < 3; ++si) {
    auto& agg = report.splits[si];
    agg.present = supported[si];
    if (!supported[si] || agg.users == 0) {
      agg.hr = agg.recall = agg.ndcg = 0;
      continue;
    }
    const double n = static_cast<double>(agg.users);
    agg.hr /= n;
    agg.recall /= n;
    agg.ndcg /= n;
  }
  return report;
}

// Scores p_u . e_c with `item_embeddings` row r holding item `items[r]`.
inline Ranker embedding_ranker(const nn::Matrix& users, const nn::Matrix& item_embeddings,
                               std::span<const Index> items, const data::DatasetBundle& b) {
  if (item_embeddings.rows() != items.size())
    fail(ErrorKind::Dimension, "embedding_ranker: " + std::to_string(items.size()) + " items but " +
                                   std::to_string(item_embeddings.rows()) + " embedding rows");
  if (item_embeddings.cols() != users.cols())
    fail(ErrorKind::Dimension, "embedding_ranker: user dim " + std::to_string(users.cols()) +
                                   " != item dim " + std::to_string(item_embeddings.cols()));
  std::vector<std::int64_t> row_of(b.num_items(), -1);
  for (std::size_t r = 0; r < items.size(); ++r) row_of[items[r]] = static_cast<std::int64_t>(r);
  return [&users, &item_embeddings, &b, row_of = std::move(row_of)](
             Index u, Split, std::span<const Index> candidates, std::size_t k) -> std::optional<std::vector<Index>> {
    std::vector<float> scores(candidates.size());
    const auto pu = users.row(u);
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      const auto r = row_of[candidates[i]];
      if (r < 0) fail(ErrorKind::MissingArtifact, "no embedding for item " + b.items[candidates[i]]);
      scores[i] = nn::dot(pu, item_embeddings.row(static_cast<std::size_t>(r)));
    }
    return rank_topk(candidates, std::span<const float>(scores), k).items;
  };
}

inline MetricsReport evaluate_embeddings(const data::DatasetBundle& b,
                                         const std::vector<data::EvalInteraction>& interactions,
                                         std::span<const Index> items, const nn::Matrix& users,
                                         const nn::Matrix& item_embeddings, std::size_t k) {
  return evaluate(b, interactions, items, embedding_ranker(users, item_embeddings, items, b), k);
}

}  // namespace acarec::eval
