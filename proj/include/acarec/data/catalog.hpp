#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "acarec/data/interactions.hpp"
#include "acarec/io.hpp"

namespace acarec::data {

// Item metadata: the (first) artist of every item and its content vector.
struct Catalog {
  std::map<std::string, std::string> artist_of;
  std::map<std::string, std::vector<float>> content;
  std::size_t content_dim = 0;
};

// `item<TAB>artist[<TAB>more artists...]`; only the first artist is kept.
inline void parse_artists(std::string_view text, Catalog& catalog, std::string_view source = "artists") {
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    const auto line = detail::rstrip(raw);
    if (line.empty()) return;
    const auto cols = detail::split(line, '\t');
    if (cols.size() < 2 || cols[0].empty() || cols[1].empty())
      fail(ErrorKind::Parse, std::string(source) + ":" + std::to_string(line_no) + ": expected item<TAB>artist");
    catalog.artist_of.insert_or_assign(std::string(cols[0]), std::string(cols[1]));
  });
}

// Header `<item_count> <d_c>`, then `item v1 ... v_dc` per line. Exact-zero
// vectors are rejected because cosine similarity is undefined for them.
inline void parse_content(std::string_view text, Catalog& catalog, std::string_view source = "content") {
  std::size_t expected_items = 0;
  std::size_t seen = 0;
  detail::for_each_line(text, [&](std::size_t line_no, std::string_view raw) {
    const auto line = detail::rstrip(raw);
    auto bad = [&](const std::string& why) {
      fail(ErrorKind::Parse, std::string(source) + ":" + std::to_string(line_no) + ": " + why);
    };
    if (line_no == 1) {
      const auto cols = detail::split(line, ' ');
      if (cols.size() != 2) bad("expected header '<item_count> <d_c>'");
      auto r1 = std::from_chars(cols[0].data(), cols[0].data() + cols[0].size(), expected_items);
      auto r2 = std::from_chars(cols[1].data(), cols[1].data() + cols[1].size(), catalog.content_dim);
      if (r1.ec != std::errc() || r2.ec != std::errc() || catalog.content_dim == 0) bad("bad header");
      return;
    }
    if (line.empty()) return;
    const auto cols = detail::split(line, ' ');
    if (cols.size() != catalog.content_dim + 1)
      bad("expected item token plus " + std::to_string(catalog.content_dim) + " values, got " +
          std::to_string(cols.size() - 1));
    std::vector<float> v(catalog.content_dim);
    double norm = 0;
    for (std::size_t j = 0; j < v.size(); ++j) {
      const auto& c = cols[j + 1];
      auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v[j]);
      if (ec != std::errc() || ptr != c.data() + c.size() || !std::isfinite(v[j]))
        bad("value " + std::to_string(j + 1) + " is not a finite number");
      norm += double(v[j]) * v[j];
    }
    if (norm == 0.0) bad("zero content vector for item " + std::string(cols[0]));
    catalog.content.insert_or_assign(std::string(cols[0]), std::move(v));
    ++seen;
  });
  if (seen != expected_items)
    fail(ErrorKind::Parse, std::string(source) + ": header declares " + std::to_string(expected_items) +
                               " items, found " + std::to_string(seen));
}

inline Catalog load_catalog(const std::filesystem::path& artists_path, const std::filesystem::path& content_path) {
  io::require_file(artists_path, "artists file");
  io::require_file(content_path, "content file");
  Catalog catalog;
  parse_artists(io::read_text(artists_path), catalog, artists_path.string());
  parse_content(io::read_text(content_path), catalog, content_path.string());
  return catalog;
}

inline std::string format_artists(const Catalog& catalog) {
  std::string out;
  for (const auto& [item, artist] : catalog.artist_of) out += item + '\t' + artist + '\n';
  return out;
}

// Rows in the content.vec text format. Also used to export cold embeddings.
inline std::string format_vectors(const std::vector<std::pair<std::string, std::vector<float>>>& rows,
                                  std::size_t dim) {
  std::string out = std::to_string(rows.size()) + " " + std::to_string(dim) + "\n";
  for (const auto& [name, v] : rows) {
    out += name;
    for (float x : v) {
      out += ' ';
      out += io::format_float(x);
    }
    out += '\n';
  }
  return out;
}

inline std::string format_content(const Catalog& catalog) {
  std::vector<std::pair<std::string, std::vector<float>>> rows(catalog.content.begin(), catalog.content.end());
  return format_vectors(rows, catalog.content_dim);
}

}  // namespace acarec::data
