#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "acarec/data/catalog.hpp"
#include "acarec/data/interactions.hpp"
#include "acarec/data/sampling.hpp"
#include "acarec/io.hpp"
#include "acarec/nn/matrix.hpp"

namespace acarec::data {

enum class SplitLabel : std::uint8_t { Discovery, Exploit };

inline std::string_view to_string(SplitLabel l) { return l == SplitLabel::Discovery ? "discovery" : "exploit"; }

enum class SplitMode {
  // Cold validation items first appear in [train_end, val_end); cold test
  // items first appear in [val_end, test_end).
  ValidationWindow,
  // Items first appearing in [train_end, test_end) are divided by first
  // appearance time: the earliest `val_fraction` go to validation.
  ValidationFraction,
};

struct SplitSpec {
  std::int64_t train_start = 0;
  std::int64_t train_end = 0;
  std::int64_t val_end = 0;
  std::int64_t test_end = 0;
  std::size_t core_k = 5;
  SplitMode mode = SplitMode::ValidationWindow;
  double val_fraction = 0.3;

  void validate() const {
    if (!(train_start < train_end && train_end <= val_end && val_end <= test_end))
      fail(ErrorKind::Config, "split windows must satisfy train_start < train_end <= val_end <= test_end");
    if (core_k == 0) fail(ErrorKind::Config, "core_k must be positive");
    if (mode == SplitMode::ValidationFraction && !(val_fraction > 0.0 && val_fraction < 1.0))
      fail(ErrorKind::Config, "val_fraction must lie in (0, 1)");
  }
};

struct EvalInteraction {
  Index user = 0;
  Index item = 0;
  SplitLabel label = SplitLabel::Discovery;

  friend bool operator==(const EvalInteraction&, const EvalInteraction&) = default;
};

// Frozen, contiguously indexed output of splitting.
//
// Item indices are laid out as [hot | cold validation | cold test]; rows of
// `content` follow the same order and CF item embeddings cover the hot range.
struct DatasetBundle {
  std::vector<std::string> users;
  std::vector<std::string> items;
  std::vector<std::string> artists;
  std::size_t num_hot = 0;
  std::size_t num_val = 0;
  std::size_t num_test = 0;

  std::vector<std::pair<Index, Index>> train;  // (user, hot item), sorted
  std::vector<Index> artist_of;                // per item
  std::vector<std::vector<Index>> artist_catalog;  // artist -> hot items, ascending
  nn::Matrix content;                          // items x d_c
  std::vector<EvalInteraction> val_interactions;
  std::vector<EvalInteraction> test_interactions;
  std::vector<std::uint32_t> popularity;       // per hot item: train interaction count

  std::size_t num_users() const { return users.size(); }
  std::size_t num_items() const { return items.size(); }
  std::size_t num_artists() const { return artists.size(); }
  std::size_t content_dim() const { return content.cols(); }

  bool is_hot(Index item) const { return item < num_hot; }
  Index val_begin() const { return static_cast<Index>(num_hot); }
  Index test_begin() const { return static_cast<Index>(num_hot + num_val); }

  std::vector<Index> cold_val_items() const { return range(val_begin(), num_val); }
  std::vector<Index> cold_test_items() const { return range(test_begin(), num_test); }
  std::vector<std::string> hot_item_tokens() const { return {items.begin(), items.begin() + num_hot}; }

  // Per-user hot items from train, ascending.
  std::vector<std::vector<Index>> user_items() const {
    std::vector<std::vector<Index>> out(num_users());
    for (const auto& [u, i] : train) out[u].push_back(i);
    return out;
  }

  // Per-user train interaction count per artist.
  std::vector<std::map<Index, std::uint32_t>> user_artist_counts() const {
    std::vector<std::map<Index, std::uint32_t>> out(num_users());
    for (const auto& [u, i] : train) ++out[u][artist_of[i]];
    return out;
  }

  // Number of distinct train users per artist.
  std::vector<std::uint32_t> artist_listeners() const {
    std::set<std::pair<Index, Index>> seen;
    std::vector<std::uint32_t> out(num_artists(), 0);
    for (const auto& [u, i] : train)
      if (seen.insert({artist_of[i], u}).second) ++out[artist_of[i]];
    return out;
  }

 private:
  static std::vector<Index> range(Index begin, std::size_t n) {
    std::vector<Index> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = begin + static_cast<Index>(i);
    return out;
  }
};

// Exploit iff the user has a train interaction with a hot item by the same
// artist as the test item; Discovery otherwise.
inline std::vector<SplitLabel> partition_artist_aware(std::span<const std::pair<Index, Index>> test_pairs,
                                                      std::span<const std::pair<Index, Index>> train,
                                                      std::span<const Index> artist_of) {
  std::set<std::pair<Index, Index>> known;  // (user, artist)
  for (const auto& [u, i] : train) known.insert({u, artist_of[i]});
  std::vector<SplitLabel> labels;
  labels.reserve(test_pairs.size());
  for (const auto& [u, c] : test_pairs)
    labels.push_back(known.count({u, artist_of[c]}) ? SplitLabel::Exploit : SplitLabel::Discovery);
  return labels;
}

namespace detail {

inline const std::string& artist_or_fail(const Catalog& catalog, const std::string& item) {
  auto it = catalog.artist_of.find(item);
  if (it == catalog.artist_of.end()) fail(ErrorKind::Parse, "item " + item + " has no artist entry");
  return it->second;
}

inline const std::vector<float>& content_or_fail(const Catalog& catalog, const std::string& item) {
  auto it = catalog.content.find(item);
  if (it == catalog.content.end()) fail(ErrorKind::Parse, "item " + item + " has no content vector");
  return it->second;
}

}  // namespace detail

inline DatasetBundle build_bundle(const std::vector<Interaction>& raw, const Catalog& catalog, const SplitSpec& spec) {
  spec.validate();
  if (raw.empty()) fail(ErrorKind::Contract, "build_bundle: no interactions");
  const auto log = dedup_earliest(raw);

  std::unordered_map<std::string, std::int64_t> first_seen;
  for (const auto& x : log) {
    auto [it, inserted] = first_seen.emplace(x.item, x.timestamp);
    if (!inserted) it->second = std::min(it->second, x.timestamp);
  }

  // Cold candidates and their role.
  enum class Role { Val, Test };
  std::map<std::string, Role> cold_role;
  if (spec.mode == SplitMode::ValidationWindow) {
    for (const auto& [item, t] : first_seen) {
      if (t >= spec.train_end && t < spec.val_end) cold_role[item] = Role::Val;
      else if (t >= spec.val_end && t < spec.test_end) cold_role[item] = Role::Test;
    }
  } else {
    std::vector<std::pair<std::int64_t, std::string>> fresh;
    for (const auto& [item, t] : first_seen)
      if (t >= spec.train_end && t < spec.test_end) fresh.emplace_back(t, item);
    std::sort(fresh.begin(), fresh.end());
    const auto n_val = static_cast<std::size_t>(std::ceil(spec.val_fraction * static_cast<double>(fresh.size())));
    for (std::size_t i = 0; i < fresh.size(); ++i) cold_role[fresh[i].second] = i < n_val ? Role::Val : Role::Test;
  }
  const std::int64_t val_window_end = spec.mode == SplitMode::ValidationWindow ? spec.val_end : spec.test_end;
  const std::int64_t test_window_begin = spec.mode == SplitMode::ValidationWindow ? spec.val_end : spec.train_end;

  std::vector<Interaction> train_log;
  for (const auto& x : log) {
    if (x.timestamp < spec.train_start || x.timestamp >= spec.train_end) continue;
    if (first_seen.at(x.item) >= spec.train_end) continue;
    train_log.push_back(x);
  }
  train_log = kcore_filter(std::move(train_log), spec.core_k);

  std::set<std::string> user_set, hot_set, artist_set;
  for (const auto& x : train_log) {
    user_set.insert(x.user);
    hot_set.insert(x.item);
  }
  for (const auto& item : hot_set) artist_set.insert(detail::artist_or_fail(catalog, item));

  // Evaluation interactions: hot users, cold items by hot artists, inside the
  // item's window.
  std::vector<Interaction> val_log, test_log;
  std::set<std::string> val_set, test_set;
  for (const auto& x : log) {
    auto role = cold_role.find(x.item);
    if (role == cold_role.end()) continue;
    if (x.timestamp >= spec.test_end) continue;
    if (role->second == Role::Val && x.timestamp >= val_window_end) continue;
    if (role->second == Role::Test && x.timestamp < test_window_begin) continue;
    if (!user_set.count(x.user)) continue;
    if (!artist_set.count(detail::artist_or_fail(catalog, x.item))) continue;
    if (role->second == Role::Val) {
      val_log.push_back(x);
      val_set.insert(x.item);
    } else {
      test_log.push_back(x);
      test_set.insert(x.item);
    }
  }
  if (test_set.empty()) fail(ErrorKind::EmptyColdSplit, "empty cold split: no cold test items with hot users and artists");
  if (val_set.empty()) fail(ErrorKind::EmptyColdSplit, "empty cold split: no cold validation items with hot users and artists");

  DatasetBundle b;
  b.users.assign(user_set.begin(), user_set.end());
  b.artists.assign(artist_set.begin(), artist_set.end());
  b.items.assign(hot_set.begin(), hot_set.end());
  b.items.insert(b.items.end(), val_set.begin(), val_set.end());
  b.items.insert(b.items.end(), test_set.begin(), test_set.end());
  b.num_hot = hot_set.size();
  b.num_val = val_set.size();
  b.num_test = test_set.size();

  std::unordered_map<std::string, Index> user_index, item_index, artist_index;
  for (std::size_t i = 0; i < b.users.size(); ++i) user_index[b.users[i]] = static_cast<Index>(i);
  for (std::size_t i = 0; i < b.items.size(); ++i) item_index[b.items[i]] = static_cast<Index>(i);
  for (std::size_t i = 0; i < b.artists.size(); ++i) artist_index[b.artists[i]] = static_cast<Index>(i);

  b.content = nn::Matrix(b.items.size(), catalog.content_dim);
  b.artist_of.resize(b.items.size());
  b.artist_catalog.resize(b.artists.size());
  for (std::size_t i = 0; i < b.items.size(); ++i) {
    const auto& v = detail::content_or_fail(catalog, b.items[i]);
    if (v.size() != catalog.content_dim)
      fail(ErrorKind::Dimension, "content vector of " + b.items[i] + " has wrong length");
    std::copy(v.begin(), v.end(), b.content.row(i).begin());
    b.artist_of[i] = artist_index.at(detail::artist_or_fail(catalog, b.items[i]));
    if (i < b.num_hot) b.artist_catalog[b.artist_of[i]].push_back(static_cast<Index>(i));
  }

  for (const auto& x : train_log) b.train.emplace_back(user_index.at(x.user), item_index.at(x.item));
  std::sort(b.train.begin(), b.train.end());
  b.popularity.assign(b.num_hot, 0);
  for (const auto& [u, i] : b.train) ++b.popularity[i];

  auto labelled = [&](const std::vector<Interaction>& part) {
    std::vector<std::pair<Index, Index>> pairs;
    for (const auto& x : part) pairs.emplace_back(user_index.at(x.user), item_index.at(x.item));
    std::sort(pairs.begin(), pairs.end());
    const auto labels = partition_artist_aware(pairs, b.train, b.artist_of);
    std::vector<EvalInteraction> out;
    for (std::size_t i = 0; i < pairs.size(); ++i) out.push_back({pairs[i].first, pairs[i].second, labels[i]});
    return out;
  };
  b.val_interactions = labelled(val_log);
  b.test_interactions = labelled(test_log);
  return b;
}

// Exhaustive scan of the bundle invariants. Returns human-readable
// violations; empty means the bundle is consistent.
inline std::vector<std::string> check_invariants(const DatasetBundle& b, std::size_t core_k) {
  std::vector<std::string> bad;
  const std::set<std::string> hot(b.items.begin(), b.items.begin() + b.num_hot);
  const std::set<std::string> val(b.items.begin() + b.num_hot, b.items.begin() + b.num_hot + b.num_val);
  const std::set<std::string> test(b.items.begin() + b.num_hot + b.num_val, b.items.end());
  if (hot.size() + val.size() + test.size() != b.items.size()) bad.push_back("item tokens are not unique");
  for (const auto& t : val)
    if (hot.count(t) || test.count(t)) bad.push_back("validation item overlaps another split: " + t);
  for (const auto& t : test)
    if (hot.count(t)) bad.push_back("test item is also hot: " + t);

  std::vector<std::size_t> user_deg(b.num_users(), 0), item_deg(b.num_items(), 0);
  std::set<Index> train_artists;
  for (const auto& [u, i] : b.train) {
    if (u >= b.num_users()) bad.push_back("train user index out of range");
    if (!b.is_hot(i)) bad.push_back("cold item " + b.items[i] + " has a train interaction");
    ++user_deg[u];
    ++item_deg[i];
    train_artists.insert(b.artist_of[i]);
  }
  for (std::size_t u = 0; u < b.num_users(); ++u)
    if (user_deg[u] < core_k) bad.push_back("user " + b.users[u] + " has fewer than core_k train interactions");
  for (std::size_t i = 0; i < b.num_hot; ++i)
    if (item_deg[i] < core_k) bad.push_back("hot item " + b.items[i] + " has fewer than core_k train interactions");

  std::set<std::pair<Index, Index>> known;
  for (const auto& [u, i] : b.train) known.insert({u, b.artist_of[i]});
  auto check_eval = [&](const std::vector<EvalInteraction>& part, Index lo, std::size_t n, const char* name) {
    for (const auto& x : part) {
      if (x.item < lo || x.item >= lo + n) bad.push_back(std::string(name) + " interaction outside its cold item range");
      if (x.user >= b.num_users() || user_deg[x.user] == 0) bad.push_back(std::string(name) + " user not present in train");
      if (!train_artists.count(b.artist_of[x.item])) bad.push_back(std::string(name) + " artist not present in train");
      const bool exploit = known.count({x.user, b.artist_of[x.item]}) > 0;
      if (exploit != (x.label == SplitLabel::Exploit)) bad.push_back(std::string(name) + " Discovery/Exploit label is wrong");
    }
  };
  check_eval(b.val_interactions, b.val_begin(), b.num_val, "validation");
  check_eval(b.test_interactions, b.test_begin(), b.num_test, "test");
  return bad;
}

// Table-style counts per partition.
struct SplitStats {
  std::size_t interactions = 0, users = 0, items = 0, artists = 0;
};

inline std::map<std::string, SplitStats> split_statistics(const DatasetBundle& b) {
  auto count = [&](auto begin, auto end, auto user_of, auto item_of) {
    std::set<Index> us, is, as;
    SplitStats s;
    for (auto it = begin; it != end; ++it) {
      ++s.interactions;
      us.insert(user_of(*it));
      is.insert(item_of(*it));
      as.insert(b.artist_of[item_of(*it)]);
    }
    s.users = us.size();
    s.items = is.size();
    s.artists = as.size();
    return s;
  };
  auto pu = [](const auto& p) { return p.first; };
  auto pi = [](const auto& p) { return p.second; };
  auto eu = [](const EvalInteraction& x) { return x.user; };
  auto ei = [](const EvalInteraction& x) { return x.item; };
  std::vector<EvalInteraction> disc, expl;
  for (const auto& x : b.test_interactions) (x.label == SplitLabel::Discovery ? disc : expl).push_back(x);
  return {
      {"train", count(b.train.begin(), b.train.end(), pu, pi)},
      {"val", count(b.val_interactions.begin(), b.val_interactions.end(), eu, ei)},
      {"test", count(b.test_interactions.begin(), b.test_interactions.end(), eu, ei)},
      {"discovery", count(disc.begin(), disc.end(), eu, ei)},
      {"exploit", count(expl.begin(), expl.end(), eu, ei)},
  };
}

inline std::string format_statistics(const DatasetBundle& b) {
  const auto stats = split_statistics(b);
  const char* order[] = {"train", "val", "test", "discovery", "exploit"};
  std::string out = "metric\ttrain\tval\ttest\tdiscovery\texploit\n";
  auto row = [&](const char* name, auto field) {
    out += name;
    for (const char* part : order) out += '\t' + std::to_string(stats.at(part).*field);
    out += '\n';
  };
  row("interactions", &SplitStats::interactions);
  row("users", &SplitStats::users);
  row("items", &SplitStats::items);
  row("artists", &SplitStats::artists);
  return out;
}

// ---------------------------------------------------------------------------
// Serialization. A bundle directory holds:
//   users.tsv      index<TAB>token
//   items.tsv      index<TAB>token<TAB>role(hot|val|test)<TAB>artist_index
//   artists.tsv    index<TAB>token
//   train.tsv      user<TAB>item
//   val.tsv, test.tsv   user<TAB>item<TAB>discovery|exploit
//   content.f32    items x d_c little-endian float32, row-major
//   content.header "<rows> <d_c>"
// The fingerprint is FNV-1a over these files in the order above.

inline const std::vector<std::string>& bundle_files() {
  static const std::vector<std::string> files = {"users.tsv", "items.tsv",   "artists.tsv",  "train.tsv",
                                                 "val.tsv",   "test.tsv",    "content.f32", "content.header"};
  return files;
}

inline std::map<std::string, std::string> serialize_bundle(const DatasetBundle& b) {
  std::map<std::string, std::string> files;
  auto indexed = [](const std::vector<std::string>& tokens) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) out += std::to_string(i) + '\t' + tokens[i] + '\n';
    return out;
  };
  files["users.tsv"] = indexed(b.users);
  files["artists.tsv"] = indexed(b.artists);
  std::string items;
  for (std::size_t i = 0; i < b.items.size(); ++i) {
    const char* role = i < b.num_hot ? "hot" : (i < b.num_hot + b.num_val ? "val" : "test");
    items += std::to_string(i) + '\t' + b.items[i] + '\t' + role + '\t' + std::to_string(b.artist_of[i]) + '\n';
  }
  files["items.tsv"] = items;
  std::string train;
  for (const auto& [u, i] : b.train) train += std::to_string(u) + '\t' + std::to_string(i) + '\n';
  files["train.tsv"] = train;
  auto eval = [](const std::vector<EvalInteraction>& part) {
    std::string out;
    for (const auto& x : part)
      out += std::to_string(x.user) + '\t' + std::to_string(x.item) + '\t' + std::string(to_string(x.label)) + '\n';
    return out;
  };
  files["val.tsv"] = eval(b.val_interactions);
  files["test.tsv"] = eval(b.test_interactions);
  files["content.f32"] = io::encode_f32_le(b.content.flat());
  files["content.header"] = std::to_string(b.content.rows()) + " " + std::to_string(b.content.cols()) + "\n";
  return files;
}

inline std::string fingerprint_files(const std::map<std::string, std::string>& files) {
  io::Fnv1a h;
  for (const auto& name : bundle_files()) {
    h.update(name);
    h.update(std::string_view("\0", 1));
    h.update(files.at(name));
  }
  return h.hex();
}

inline std::string bundle_fingerprint(const DatasetBundle& b) { return fingerprint_files(serialize_bundle(b)); }

inline std::string save_bundle(const DatasetBundle& b, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto files = serialize_bundle(b);
  for (const auto& [name, text] : files) io::write_text(dir / name, text);
  return fingerprint_files(files);
}

struct LoadedBundle {
  DatasetBundle bundle;
  std::string fingerprint;
};

inline LoadedBundle load_bundle(const std::filesystem::path& dir) {
  std::map<std::string, std::string> files;
  for (const auto& name : bundle_files()) {
    io::require_file(dir / name, "bundle file");
    files[name] = io::read_text(dir / name);
  }
  DatasetBundle b;
  auto rows = [&](const std::string& name, std::size_t min_cols) {
    std::vector<std::vector<std::string>> out;
    detail::for_each_line(files.at(name), [&](std::size_t line_no, std::string_view line) {
      if (line.empty()) return;
      auto cols = detail::split(line, '\t');
      if (cols.size() < min_cols)
        fail(ErrorKind::Parse, (dir / name).string() + ":" + std::to_string(line_no) + ": too few columns");
      out.emplace_back(cols.begin(), cols.end());
    });
    return out;
  };
  auto to_index = [&](const std::string& s) {
    Index v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) fail(ErrorKind::Parse, "bad index '" + s + "' in " + dir.string());
    return v;
  };
  for (const auto& r : rows("users.tsv", 2)) b.users.push_back(r[1]);
  for (const auto& r : rows("artists.tsv", 2)) b.artists.push_back(r[1]);
  for (const auto& r : rows("items.tsv", 4)) {
    b.items.push_back(r[1]);
    b.artist_of.push_back(to_index(r[3]));
    if (r[2] == "hot") ++b.num_hot;
    else if (r[2] == "val") ++b.num_val;
    else if (r[2] == "test") ++b.num_test;
    else fail(ErrorKind::Parse, "unknown item role " + r[2]);
  }
  for (const auto& r : rows("train.tsv", 2)) b.train.emplace_back(to_index(r[0]), to_index(r[1]));
  auto eval = [&](const std::string& name) {
    std::vector<EvalInteraction> out;
    for (const auto& r : rows(name, 3))
      out.push_back({to_index(r[0]), to_index(r[1]), r[2] == "exploit" ? SplitLabel::Exploit : SplitLabel::Discovery});
    return out;
  };
  b.val_interactions = eval("val.tsv");
  b.test_interactions = eval("test.tsv");

  std::size_t n_rows = 0, dim = 0;
  {
    const auto header = detail::split(detail::rstrip(files.at("content.header")), ' ');
    if (header.size() != 2) fail(ErrorKind::Parse, "bad content.header in " + dir.string());
    std::from_chars(header[0].data(), header[0].data() + header[0].size(), n_rows);
    std::from_chars(header[1].data(), header[1].data() + header[1].size(), dim);
  }
  const auto values = io::decode_f32_le(files.at("content.f32"));
  if (n_rows != b.items.size() || values.size() != n_rows * dim)
    fail(ErrorKind::Parse, "content.f32 does not match content.header / items.tsv in " + dir.string());
  b.content = nn::Matrix(n_rows, dim);
  std::copy(values.begin(), values.end(), b.content.flat().begin());

  b.artist_catalog.resize(b.artists.size());
  for (std::size_t i = 0; i < b.num_hot; ++i) b.artist_catalog[b.artist_of[i]].push_back(static_cast<Index>(i));
  b.popularity.assign(b.num_hot, 0);
  for (const auto& [u, i] : b.train) ++b.popularity[i];
  return {std::move(b), fingerprint_files(files)};
}

}  // namespace acarec::data
