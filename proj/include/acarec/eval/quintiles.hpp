#pragma once

#include <array>
#include <map>
#include <set>
#include <vector>

#include "acarec/eval/evaluate.hpp"

namespace acarec::eval {

using Groups = std::array<std::vector<Index>, 5>;

// Items ordered by descending count (ties to the lower index) are assigned to
// group floor(5 * mass_before / total), so each group carries about a fifth
// of all interactions.
inline Groups interaction_groups(std::vector<std::pair<Index, std::size_t>> item_counts) {
  if (item_counts.size() < 5) fail(ErrorKind::Contract, "interaction quintiles need at least 5 items");
  std::sort(item_counts.begin(), item_counts.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::size_t total = 0;
  for (const auto& [item, n] : item_counts) total += n;
  if (total == 0) fail(ErrorKind::Contract, "interaction quintiles need a positive interaction count");
  Groups g;
  std::size_t before = 0;
  for (const auto& [item, n] : item_counts) {
    const std::size_t q = std::min<std::size_t>(4, 5 * before / total);
    g[q].push_back(item);
    before += n;
  }
  return g;
}

// Splits an already ordered population into five contiguous groups of
// (near) equal size.
inline Groups equal_groups(const std::vector<Index>& ordered) {
  Groups g;
  const std::size_t n = ordered.size();
  for (std::size_t q = 0; q < 5; ++q)
    for (std::size_t i = q * n / 5; i < (q + 1) * n / 5; ++i) g[q].push_back(ordered[i]);
  return g;
}

struct PopularityQuintiles {
  Groups item_groups;
  std::array<double, 5> prediction_share{};  // of all top-k slots
  std::array<std::size_t, 5> hits{};
  Groups artist_groups;  // by descending train listener count
  std::array<double, 5> artist_hit_rate{};
};

// Item and artist popularity behaviour of the Overall rankings in `report`.
inline PopularityQuintiles popularity_quintiles(const data::DatasetBundle& b,
                                                const std::vector<data::EvalInteraction>& interactions,
                                                const MetricsReport& report) {
  std::map<Index, std::size_t> counts;
  for (const auto& x : interactions) ++counts[x.item];
  PopularityQuintiles out;
  out.item_groups = interaction_groups({counts.begin(), counts.end()});
  std::map<Index, std::size_t> group_of;
  for (std::size_t q = 0; q < 5; ++q)
    for (Index i : out.item_groups[q]) group_of[i] = q;

  std::size_t slots = 0;
  std::array<std::size_t, 5> predicted{};
  std::set<Index> hit_artists;
  for (const auto& ue : report.users) {
    for (Index i : ue.overall_topk) {
      ++slots;
      const auto it = group_of.find(i);
      if (it == group_of.end()) continue;
      ++predicted[it->second];
      if (std::binary_search(ue.overall_relevant.begin(), ue.overall_relevant.end(), i)) {
        ++out.hits[it->second];
        hit_artists.insert(b.artist_of[i]);
      }
    }
  }
  // Items without test interactions never appear in `group_of`; their slots
  // count toward the last (least popular) group so that shares sum to one.
  std::size_t grouped = 0;
  for (auto p : predicted) grouped += p;
  predicted[4] += slots - grouped;
  for (std::size_t q = 0; q < 5; ++q)
    out.prediction_share[q] = slots ? static_cast<double>(predicted[q]) / static_cast<double>(slots) : 0.0;

  const auto listeners = b.artist_listeners();
  std::set<Index> artist_set;
  for (const auto& [item, n] : counts) artist_set.insert(b.artist_of[item]);
  std::vector<Index> artists(artist_set.begin(), artist_set.end());
  if (artists.size() < 5) fail(ErrorKind::Contract, "artist quintiles need at least 5 artists");
  std::stable_sort(artists.begin(), artists.end(),
                   [&](Index a, Index c) { return listeners[a] > listeners[c]; });
  out.artist_groups = equal_groups(artists);
  for (std::size_t q = 0; q < 5; ++q) {
    const auto& g = out.artist_groups[q];
    std::size_t hit = 0;
    for (Index a : g) hit += hit_artists.count(a);
    out.artist_hit_rate[q] = g.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(g.size());
  }
  return out;
}

struct UserArtistQuintiles {
  Groups user_groups;  // ascending distinct train artist count
  std::array<double, 5> mean_recall{};
};

// Users evaluated on Discovery grouped by how many artists they listen to.
inline UserArtistQuintiles user_artist_quintiles(const data::DatasetBundle& b, const MetricsReport& report) {
  const auto artists = known_artists(b);
  std::vector<Index> users;
  std::map<Index, double> recall;
  for (const auto& ue : report.users) {
    const auto& m = ue.metrics[static_cast<std::size_t>(Split::Discovery)];
    if (!m) continue;
    users.push_back(ue.user);
    recall[ue.user] = m->recall;
  }
  if (users.size() < 5) fail(ErrorKind::Contract, "user quintiles need at least 5 users evaluated on discovery");
  std::stable_sort(users.begin(), users.end(),
                   [&](Index a, Index c) { return artists[a].size() < artists[c].size(); });
  UserArtistQuintiles out;
  out.user_groups = equal_groups(users);
  for (std::size_t q = 0; q < 5; ++q) {
    double sum = 0;
    for (Index u : out.user_groups[q]) sum += recall[u];
    const auto n = out.user_groups[q].size();
    out.mean_recall[q] = n ? sum / static_cast<double>(n) : 0.0;
  }
  return out;
}

}  // namespace acarec::eval
