#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <type_traits>
#include <vector>

#include "acarec/cf/bpr.hpp"
#include "acarec/coldstart/acarec.hpp"
#include "acarec/coldstart/trainer.hpp"
#include "acarec/data/bundle.hpp"
#include "acarec/data/synthetic.hpp"
#include "acarec/io.hpp"
#include "json.hpp"

namespace acarec::cli {

namespace fs = std::filesystem;
using nlohmann::json;

struct Paths {
  std::string interactions;  // empty: <output>/synth/interactions.tsv
  std::string artists;       // empty: <output>/synth/artists.tsv
  std::string content;       // empty: <output>/synth/content.vec
  std::string output = "run";
};

struct SynthSettings {
  data::SynthConfig config;
  std::uint64_t seed = 1;
};

struct HeuristicSettings {
  std::vector<double> tau_grid = coldstart::default_tau_grid();
};

struct EvalSettings {
  std::size_t k = 20;
  std::size_t context = 0;  // inference TopN; 0 is the full catalog
};

struct SweepSettings {
  std::vector<std::size_t> train_sizes = {3, 5, 10, 20, 30, 40, 50};
  std::vector<std::size_t> top_n = {3, 5, 10, 20, 30, 40, 50};
};

// Dimensions of the cold model come from the bundle and CF checkpoint, so
// `model.content_dim` and `model.embed_dim` are not configurable.
struct RunConfig {
  Paths paths;
  SynthSettings synth;
  data::SplitSpec split = data::SynthConfig{}.default_split();
  cf::BPRConfig cf;
  coldstart::ACARecConfig model;
  coldstart::ColdTrainConfig train;
  HeuristicSettings heuristics;
  EvalSettings eval;
  SweepSettings sweep;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};

  fs::path output() const { return paths.output; }
  fs::path interactions_path() const {
    return paths.interactions.empty() ? output() / "synth" / "interactions.tsv" : fs::path(paths.interactions);
  }
  fs::path artists_path() const {
    return paths.artists.empty() ? output() / "synth" / "artists.tsv" : fs::path(paths.artists);
  }
  fs::path content_path() const {
    return paths.content.empty() ? output() / "synth" / "content.vec" : fs::path(paths.content);
  }

  void validate() const {
    if (paths.output.empty()) fail(ErrorKind::Config, "paths.output must not be empty");
    if (seeds.empty()) fail(ErrorKind::Config, "seeds must not be empty");
    synth.config.validate();
    split.validate();
    cf.validate();
    train.validate();
    if (model.heads == 0) fail(ErrorKind::Config, "model.heads must be positive");
    if (model.train_context == 0) fail(ErrorKind::Config, "model.train_context must be positive");
    if (heuristics.tau_grid.empty()) fail(ErrorKind::Config, "heuristics.tau_grid must not be empty");
    for (double t : heuristics.tau_grid)
      if (!(t > 0)) fail(ErrorKind::Config, "heuristics.tau_grid values must be positive");
    if (eval.k == 0) fail(ErrorKind::Config, "eval.k must be positive");
    for (const auto* grid : {&sweep.train_sizes, &sweep.top_n})
      for (auto n : *grid)
        if (n == 0) fail(ErrorKind::Config, "sweep sizes must be positive");
  }
};

// Field lists shared by the reader and the writer.
template <class F> void fields(Paths& p, F& f) {
  f("interactions", p.interactions);
  f("artists", p.artists);
  f("content", p.content);
  f("output", p.output);
}
template <class F> void fields(SynthSettings& s, F& f) {
  auto& c = s.config;
  f("seed", s.seed);
  f("num_users", c.num_users);
  f("num_artists", c.num_artists);
  f("num_tracks", c.num_tracks);
  f("min_tracks_per_artist", c.min_tracks_per_artist);
  f("artist_size_skew", c.artist_size_skew);
  f("latent_dim", c.latent_dim);
  f("content_dim", c.content_dim);
  f("content_rank", c.content_rank);
  f("styles_per_artist", c.styles_per_artist);
  f("style_share", c.style_share);
  f("track_noise", c.track_noise);
  f("atypical_share", c.atypical_share);
  f("content_noise", c.content_noise);
  f("popularity_spread", c.popularity_spread);
  f("signal", c.signal);
  f("min_user_interactions", c.min_user_interactions);
  f("mean_extra_interactions", c.mean_extra_interactions);
  f("back_catalog_share", c.back_catalog_share);
  f("horizon_seconds", c.horizon_seconds);
}
template <class F> void fields(data::SplitSpec& s, F& f) {
  f("train_start", s.train_start);
  f("train_end", s.train_end);
  f("val_end", s.val_end);
  f("test_end", s.test_end);
  f("core_k", s.core_k);
  f("mode", s.mode);
  f("val_fraction", s.val_fraction);
}
template <class F> void fields(cf::BPRConfig& c, F& f) {
  f("dim", c.dim);
  f("learning_rate", c.learning_rate);
  f("l2", c.l2);
  f("epochs", c.epochs);
  f("negatives", c.negatives);
  f("batch_size", c.batch_size);
  f("patience", c.patience);
  f("eval_k", c.eval_k);
  f("init_std", c.init_std);
  f("seed", c.seed);
}
template <class F> void fields(coldstart::ACARecConfig& c, F& f) {
  f("heads", c.heads);
  f("self_attention", c.self_attention);
  f("content_input", c.content_input);
  f("fusion", c.fusion);
  f("train_context", c.train_context);
}
template <class F> void fields(coldstart::ColdTrainConfig& c, F& f) {
  f("learning_rate", c.learning_rate);
  f("batch_size", c.batch_size);
  f("max_epochs", c.max_epochs);
  f("patience", c.patience);
  f("eval_k", c.eval_k);
}
template <class F> void fields(HeuristicSettings& h, F& f) { f("tau_grid", h.tau_grid); }
template <class F> void fields(EvalSettings& e, F& f) {
  f("k", e.k);
  f("context", e.context);
}
template <class F> void fields(SweepSettings& s, F& f) {
  f("train_sizes", s.train_sizes);
  f("top_n", s.top_n);
}

template <class F> void sections(RunConfig& c, F&& f) {
  f("paths", c.paths);
  f("synth", c.synth);
  f("split", c.split);
  f("cf", c.cf);
  f("model", c.model);
  f("train", c.train);
  f("heuristics", c.heuristics);
  f("eval", c.eval);
  f("sweep", c.sweep);
}

namespace detail {

inline std::string split_mode_name(data::SplitMode m) {
  return m == data::SplitMode::ValidationWindow ? "window" : "fraction";
}

class Writer {
 public:
  explicit Writer(json& out) : out_(out) {}
  template <class T>
  void operator()(const char* key, const T& v) {
    if constexpr (std::is_same_v<T, data::SplitMode>) out_[key] = split_mode_name(v);
    else if constexpr (std::is_same_v<T, coldstart::Fusion>) out_[key] = std::string(coldstart::to_string(v));
    else out_[key] = v;
  }

 private:
  json& out_;
};

class Reader {
 public:
  Reader(const json& in, std::string section) : in_(in), section_(std::move(section)) {
    if (!in_.is_object()) fail(ErrorKind::Config, "config section '" + section_ + "' must be an object");
  }

  template <class T>
  void operator()(const char* key, T& v) {
    seen_.insert(key);
    const auto it = in_.find(key);
    if (it == in_.end()) return;
    const std::string name = section_ + "." + key;
    if constexpr (std::is_same_v<T, data::SplitMode>) {
      const auto s = string_value(*it, name);
      if (s == "window") v = data::SplitMode::ValidationWindow;
      else if (s == "fraction") v = data::SplitMode::ValidationFraction;
      else fail(ErrorKind::Config, name + " must be 'window' or 'fraction', got '" + s + "'");
    } else if constexpr (std::is_same_v<T, coldstart::Fusion>) {
      v = coldstart::parse_fusion(string_value(*it, name));
    } else {
      check_type<T>(*it, name);
      v = it->template get<T>();
    }
  }

  void finish() const {
    for (const auto& [key, value] : in_.items())
      if (!seen_.count(key)) fail(ErrorKind::Config, "unknown config key '" + section_ + "." + key + "'");
  }

 private:
  static std::string string_value(const json& j, const std::string& name) {
    if (!j.is_string()) fail(ErrorKind::Config, name + " must be a string");
    return j.get<std::string>();
  }

  template <class T>
  static void check_type(const json& j, const std::string& name) {
    bool ok = true;
    if constexpr (std::is_same_v<T, bool>) ok = j.is_boolean();
    else if constexpr (std::is_unsigned_v<T>) ok = j.is_number_unsigned();
    else if constexpr (std::is_integral_v<T>) ok = j.is_number_integer();
    else if constexpr (std::is_floating_point_v<T>) ok = j.is_number();
    else if constexpr (std::is_same_v<T, std::string>) ok = j.is_string();
    else if constexpr (requires { typename T::value_type; }) {
      ok = j.is_array();
      if (ok)
        for (const auto& e : j) check_type<typename T::value_type>(e, name + "[]");
    }
    if (!ok) fail(ErrorKind::Config, name + " has the wrong type (" + std::string(j.type_name()) + ")");
  }

  const json& in_;
  std::string section_;
  std::set<std::string> seen_;
};

}  // namespace detail

inline json to_json(const RunConfig& c) {
  json out = json::object();
  sections(const_cast<RunConfig&>(c), [&](const char* name, auto& section) {
    json s = json::object();
    detail::Writer w(s);
    fields(section, w);
    out[name] = s;
  });
  out["seeds"] = c.seeds;
  return out;
}

// Missing keys keep their defaults; unknown keys and wrongly typed values are
// config errors.
inline RunConfig config_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::Config, "config must be a JSON object");
  RunConfig c;
  std::set<std::string> known = {"seeds"};
  sections(c, [&](const char* name, auto& section) {
    known.insert(name);
    if (!j.contains(name)) return;
    detail::Reader r(j.at(name), name);
    fields(section, r);
    r.finish();
  });
  for (const auto& [key, value] : j.items())
    if (!known.count(key)) fail(ErrorKind::Config, "unknown config section '" + key + "'");
  if (j.contains("seeds")) {
    const auto& s = j.at("seeds");
    bool ok = s.is_array();
    if (ok)
      for (const auto& e : s) ok = ok && e.is_number_unsigned();
    if (!ok) fail(ErrorKind::Config, "seeds must be an array of non-negative integers");
    c.seeds = s.get<std::vector<std::uint64_t>>();
  }
  c.validate();
  return c;
}

// Applies "section.key=value" to a config document. The value is read as
// JSON when it parses and as a plain string otherwise.
inline void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    fail(ErrorKind::Config, "override '" + assignment + "' is not of the form key=value");
  const std::string path = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string part = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) fail(ErrorKind::Config, "override key '" + path + "' has an empty component");
    if (!node->is_object()) fail(ErrorKind::Config, "override key '" + path + "' does not name a config field");
    if (dot == std::string::npos) {
      (*node)[part] = value;
      return;
    }
    node = &(*node)[part];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

inline json read_config_file(const fs::path& path) {
  const auto text = io::read_text(path);
  json j = json::parse(text, nullptr, false, true);
  if (j.is_discarded()) fail(ErrorKind::Config, "config file " + path.string() + " is not valid JSON");
  return j;
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Written next to every artifact so a directory records how it was made.
inline void echo_config(const fs::path& dir, const RunConfig& c) { io::write_text(dir / "config.json", dump(to_json(c))); }

}  // namespace acarec::cli
