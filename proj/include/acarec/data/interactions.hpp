#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "acarec/error.hpp"
#include "acarec/io.hpp"

namespace acarec::data {

struct Interaction {
  std::string user;
  std::string item;
  std::int64_t timestamp = 0;

  friend bool operator==(const Interaction&, const Interaction&) = default;
};

namespace detail {

inline std::string_view rstrip(std::string_view s) {
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <class F>
void for_each_line(std::string_view text, F&& f) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    f(line_no, text.substr(start, end - start));
    start = end + 1;
  }
}

}  // namespace detail

// Keeps one event per (user, item) pair, the earliest. Output is sorted by
// (user, item).
inline std::vector<Interaction> dedup_earliest(std::vector<Interaction> interactions) {
  std::sort(interactions.begin(), interactions.end(), [](const auto& a, const auto& b) {
    if (a.user != b.user) return a.user < b.user;
    if (a.item != b.item) return a.item < b.item;
    return a.timestamp < b.timestamp;
  });
  auto last = std::unique(interactions.begin(), interactions.end(), [](const auto& a, const auto& b) {
    return a.user == b.user && a.item == b.item;
  });
  interactions.erase(last, interactions.end());
  return interactions;
}

// Parses `user<TAB>item<TAB>timestamp` rows. Trailing whitespace is
// tolerated; anything else off-format is a parse error naming the line.
inline std::vector<Interaction> parse_interactions(std::string_view text, std::string_view source = "input") {
  std::vector<Interaction> out;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    const auto line = detail::rstrip(raw);
    if (line.empty()) return;
    const auto cols = detail::split(line, '\t');
    auto bad = [&](const std::string& why) {
      fail(ErrorKind::Parse, std::string(source) + ":" + std::to_string(line_no) + ": " + why);
    };
    if (cols.size() != 3) bad("expected user<TAB>item<TAB>timestamp, got " + std::to_string(cols.size()) + " column(s)");
    if (cols[0].empty() || cols[1].empty()) bad("empty user or item token");
    std::int64_t ts = 0;
    const auto [ptr, ec] = std::from_chars(cols[2].data(), cols[2].data() + cols[2].size(), ts);
    if (ec != std::errc() || ptr != cols[2].data() + cols[2].size()) bad("timestamp is not an integer");
    if (ts < 0) bad("negative timestamp");
    out.push_back({std::string(cols[0]), std::string(cols[1]), ts});
  });
  return dedup_earliest(std::move(out));
}

inline std::vector<Interaction> load_interactions(const std::filesystem::path& path) {
  io::require_file(path, "interactions file");
  return parse_interactions(io::read_text(path), path.string());
}

inline std::string format_interactions(const std::vector<Interaction>& interactions) {
  std::string out;
  for (const auto& x : interactions) {
    out += x.user;
    out += '\t';
    out += x.item;
    out += '\t';
    out += std::to_string(x.timestamp);
    out += '\n';
  }
  return out;
}

// Largest subset in which every user and every item has at least k
// interactions, found by repeated peeling until nothing changes.
inline std::vector<Interaction> kcore_filter(std::vector<Interaction> interactions, std::size_t k) {
  if (k == 0) fail(ErrorKind::Config, "k-core filtering needs k >= 1");
  while (true) {
    std::unordered_map<std::string_view, std::size_t> user_deg, item_deg;
    for (const auto& x : interactions) {
      ++user_deg[x.user];
      ++item_deg[x.item];
    }
    std::vector<Interaction> kept;
    kept.reserve(interactions.size());
    for (auto& x : interactions)
      if (user_deg[x.user] >= k && item_deg[x.item] >= k) kept.push_back(x);
    if (kept.size() == interactions.size()) return interactions;
    interactions = std::move(kept);
  }
}

}  // namespace acarec::data
