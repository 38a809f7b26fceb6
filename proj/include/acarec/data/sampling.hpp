#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "acarec/nn/random.hpp"

namespace acarec::data {

using Index = std::uint32_t;

// Uniform sample without replacement of min(n, available) items from
// `artist_items` minus `target`. nullopt signals an empty context (nothing
// left once the target is withheld).
inline std::optional<std::vector<Index>> sample_context(std::span<const Index> artist_items, Index target,
                                                        std::size_t n, Rng& rng) {
  std::vector<Index> pool;
  pool.reserve(artist_items.size());
  for (Index i : artist_items)
    if (i != target) pool.push_back(i);
  if (pool.empty()) return std::nullopt;
  const std::size_t take = std::min(n, pool.size());
  for (std::size_t i = 0; i < take; ++i) {
    const auto j = i + static_cast<std::size_t>(uniform_index(rng, pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(take);
  return pool;
}

// The n most popular items; ties go to the lower index.
inline std::vector<Index> top_n_by_popularity(std::span<const Index> artist_items,
                                              std::span<const std::uint32_t> popularity, std::size_t n) {
  std::vector<Index> items(artist_items.begin(), artist_items.end());
  auto more_popular = [&](Index a, Index b) {
    if (popularity[a] != popularity[b]) return popularity[a] > popularity[b];
    return a < b;
  };
  if (n >= items.size()) {
    std::sort(items.begin(), items.end(), more_popular);
    return items;
  }
  std::partial_sort(items.begin(), items.begin() + static_cast<std::ptrdiff_t>(n), items.end(), more_popular);
  items.resize(n);
  return items;
}

}  // namespace acarec::data
