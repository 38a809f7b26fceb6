#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <tuple>
#include <variant>
#include <vector>

#include "acarec/cf/bpr.hpp"
#include "acarec/cli/config.hpp"
#include "acarec/coldstart/heuristics.hpp"
#include "acarec/coldstart/trainer.hpp"
#include "acarec/data/bundle.hpp"
#include "acarec/data/catalog.hpp"
#include "acarec/data/interactions.hpp"
#include "acarec/data/synthetic.hpp"
#include "acarec/eval/report.hpp"
#include "acarec/io.hpp"

namespace acarec::cli {

// Directory layout under paths.output:
//   synth/                         generated inputs
//   bundle/                        split bundle, stats.tsv, manifest.json
//   cf/                            BPR checkpoint, history.json
//   models/acarec/<label>/seed-N   ACARec checkpoints by configuration label
//   models/<deepmusic|deepmusic+am>/seed-N
//   models/sweep/train-<n>/seed-N  context-size sweep checkpoints
//   eval/<method>[@top<n>]/        report.txt, report.json, quintiles.tsv
//   ablate/, sweep/                report.tsv, report.json
struct Workspace {
  fs::path root;

  fs::path synth() const { return root / "synth"; }
  fs::path bundle() const { return root / "bundle"; }
  fs::path cf() const { return root / "cf"; }
  fs::path acarec_model(const coldstart::ACARecConfig& c, std::uint64_t seed) const {
    return root / "models" / "acarec" / c.label() / seed_dir(seed);
  }
  fs::path deepmusic_model(const std::string& method, std::uint64_t seed) const {
    return root / "models" / method / seed_dir(seed);
  }
  fs::path sweep_model(std::size_t n, std::uint64_t seed) const {
    return root / "models" / "sweep" / ("train-" + std::to_string(n)) / seed_dir(seed);
  }
  fs::path eval(const std::string& method, std::size_t context) const {
    return root / "eval" / (context ? method + "@top" + std::to_string(context) : method);
  }
  fs::path ablate() const { return root / "ablate"; }
  fs::path sweep() const { return root / "sweep"; }

  static std::string seed_dir(std::uint64_t seed) { return "seed-" + std::to_string(seed); }
};

inline const std::vector<std::string>& eval_methods() {
  static const std::vector<std::string> m = {"acarec",        "deepmusic",         "deepmusic+am", "artistmean",
                                             "artistmeanpop", "artistmeancontsim", "paf",          "random"};
  return m;
}

inline void require_method(const std::string& method, const std::vector<std::string>& allowed) {
  if (std::find(allowed.begin(), allowed.end(), method) != allowed.end()) return;
  std::string list;
  for (const auto& m : allowed) list += (list.empty() ? "" : ", ") + m;
  fail(ErrorKind::Config, "unknown method '" + method + "' (expected one of " + list + ")");
}

inline std::string file_hash(const fs::path& p) {
  io::Fnv1a h;
  h.update(io::read_text(p));
  return h.hex();
}

inline std::string cf_fingerprint(const cf::CFEmbeddings& cf) {
  io::Fnv1a h;
  h.update(io::encode_f32_le(cf.P.flat()));
  h.update(io::encode_f32_le(cf.E.flat()));
  return h.hex();
}

inline coldstart::ContextMode context_mode(std::size_t n) {
  return n ? coldstart::ContextMode::top(n) : coldstart::ContextMode::full();
}

inline std::string context_name(std::size_t n) { return n ? "top" + std::to_string(n) : "full"; }

// ---------------------------------------------------------------------------
// gen-synth, split, train-cf

inline void gen_synth(const RunConfig& c, std::ostream& log) {
  const Workspace ws{c.output()};
  const auto w = data::gen_synthetic(c.synth.config, c.synth.seed);
  data::write_synthetic(w, ws.synth());
  json files = json::object();
  for (const char* name : {"interactions.tsv", "artists.tsv", "content.vec"}) files[name] = file_hash(ws.synth() / name);
  io::write_text(ws.synth() / "manifest.json",
                 dump({{"kind", "synthetic"}, {"seed", c.synth.seed}, {"files", files}}));
  echo_config(ws.synth(), c);
  log << "gen-synth: " << w.interactions.size() << " interactions, " << w.user_tokens.size() << " users, "
      << w.track_tokens.size() << " tracks, " << w.artist_tokens.size() << " artists -> " << ws.synth().string()
      << "\n";
}

inline std::string split(const RunConfig& c, std::ostream& log) {
  const Workspace ws{c.output()};
  io::require_file(c.interactions_path(), "interactions file");
  io::require_file(c.artists_path(), "artists file");
  io::require_file(c.content_path(), "content file");
  const auto raw = data::load_interactions(c.interactions_path());
  const auto catalog = data::load_catalog(c.artists_path(), c.content_path());
  const auto b = data::build_bundle(raw, catalog, c.split);
  const auto fp = data::save_bundle(b, ws.bundle());
  const auto stats = data::format_statistics(b);
  io::write_text(ws.bundle() / "stats.tsv", stats);
  io::write_text(ws.bundle() / "manifest.json", dump({{"kind", "bundle"}, {"fingerprint", fp}}));
  echo_config(ws.bundle(), c);
  log << stats << "fingerprint " << fp << "\n";
  return fp;
}

inline data::LoadedBundle load_bundle(const RunConfig& c) {
  const Workspace ws{c.output()};
  io::require_file(ws.bundle() / "manifest.json", "bundle (run split first)");
  return data::load_bundle(ws.bundle());
}

inline json section_json(const cf::BPRConfig& cfg) {
  json out = json::object();
  detail::Writer w(out);
  fields(const_cast<cf::BPRConfig&>(cfg), w);
  return out;
}

inline json section_json(const coldstart::ColdTrainConfig& cfg) {
  json out = json::object();
  detail::Writer w(out);
  fields(const_cast<coldstart::ColdTrainConfig&>(cfg), w);
  return out;
}

inline cf::CFEmbeddings train_cf(const RunConfig& c, std::ostream& log) {
  const Workspace ws{c.output()};
  const auto lb = load_bundle(c);
  const auto r = cf::train_bpr(lb.bundle, c.cf);
  cf::save_cf(ws.cf(), r.embeddings, lb.fingerprint, section_json(c.cf));
  const auto& h = r.history;
  io::write_text(ws.cf() / "history.json", dump({{"loss", h.loss},
                                                 {"heldout_ndcg", h.val_ndcg},
                                                 {"best_epochs", h.best_epochs},
                                                 {"best_heldout_ndcg", h.best_ndcg}}));
  echo_config(ws.cf(), c);
  log << "train-cf: dim " << c.cf.dim << ", " << h.loss.size() << " holdout epochs, refit for " << h.best_epochs
      << " epochs, held-out NDCG@" << c.cf.eval_k << " " << io::format_double(h.best_ndcg, 4) << "\n";
  return r.embeddings;
}

// Bundle plus CF embeddings, the inputs of every cold-start command.
struct Context {
  data::LoadedBundle loaded;
  cf::CFEmbeddings cf;
  std::string cf_fingerprint;

  const data::DatasetBundle& bundle() const { return loaded.bundle; }
  const std::string& fingerprint() const { return loaded.fingerprint; }
};

inline Context load_context(const RunConfig& c) {
  Context ctx{load_bundle(c), {}, {}};
  const Workspace ws{c.output()};
  io::require_file(ws.cf() / "manifest.json", "cf checkpoint (run train-cf first)");
  ctx.cf = cf::load_cf(ws.cf(), ctx.bundle(), ctx.fingerprint());
  ctx.cf_fingerprint = cf_fingerprint(ctx.cf);
  return ctx;
}

// ---------------------------------------------------------------------------
// Cold-start models

using ColdModel = std::variant<coldstart::ACARecModel, coldstart::DeepMusicModel>;

inline coldstart::ACARecConfig acarec_config(const coldstart::ACARecConfig& model, const Context& ctx) {
  auto c = model;
  c.content_dim = ctx.bundle().content_dim();
  c.embed_dim = ctx.cf.dim();
  return c;
}

inline ColdModel make_model(const std::string& method, const coldstart::ACARecConfig& model, const Context& ctx,
                            std::uint64_t seed) {
  if (method == "acarec") return coldstart::ACARecModel::create(acarec_config(model, ctx), seed);
  require_method(method, {"acarec", "deepmusic", "deepmusic+am"});
  return coldstart::DeepMusicModel::create({ctx.bundle().content_dim(), ctx.cf.dim(), method == "deepmusic+am"},
                                           seed);
}

inline std::string method_of(const ColdModel& m) {
  return std::visit([](const auto& x) { return x.method(); }, m);
}

inline json train_meta(const RunConfig& c, const Context& ctx, std::uint64_t seed) {
  return {{"settings", section_json(c.train)}, {"seed", seed}, {"cf_fingerprint", ctx.cf_fingerprint}};
}

// A checkpoint is current when it was trained from the same bundle, CF
// embeddings, model configuration, training settings and seed.
inline bool checkpoint_current(const fs::path& dir, const ColdModel& m, const json& train) {
  if (!fs::exists(dir / "manifest.json")) return false;
  const auto meta = nn::read_checkpoint_meta(dir);
  const auto config = std::visit([](const auto& x) { return x.config_json(); }, m);
  return meta.value("kind", "") == method_of(m) && meta.value("config", json()) == config &&
         meta.value("train", json()) == train;
}

inline void require_current_cf(const fs::path& dir, const Context& ctx) {
  const auto meta = coldstart::read_model_meta(dir, ctx.fingerprint());
  const auto got = meta.value("train", json::object()).value("cf_fingerprint", std::string());
  if (got != ctx.cf_fingerprint)
    fail(ErrorKind::Fingerprint, "model checkpoint " + dir.string() + " was trained on cf embeddings " + got +
                                     " but the cf checkpoint is " + ctx.cf_fingerprint);
}

// Trains into `dir` unless a current checkpoint is already there, in which
// case it is loaded. Returns true when training ran.
inline bool ensure_model(ColdModel& m, const fs::path& dir, const RunConfig& c, const Context& ctx,
                         std::uint64_t seed, std::ostream& log) {
  const auto meta = train_meta(c, ctx, seed);
  if (checkpoint_current(dir, m, meta)) {
    require_current_cf(dir, ctx);
    std::visit([&](auto& x) { nn::load_checkpoint(dir, x.params); }, m);
    return false;
  }
  auto tc = c.train;
  tc.seed = seed;
  const auto h = std::visit([&](auto& x) { return coldstart::train_cold(x, ctx.bundle(), ctx.cf, tc); }, m);
  std::visit([&](const auto& x) { coldstart::save_model(dir, x, ctx.fingerprint(), meta); }, m);
  io::write_text(dir / "history.json", dump({{"initial_loss", h.initial_loss},
                                             {"loss", h.loss},
                                             {"val_ndcg", h.val_ndcg},
                                             {"best_epoch", h.best_epoch},
                                             {"best_val_ndcg", h.best_ndcg}}));
  log << "  " << dir.string() << ": best epoch " << h.best_epoch << " of " << h.loss.size() << ", val NDCG@"
      << tc.eval_k << " " << io::format_double(h.best_ndcg, 4) << "\n";
  return true;
}

inline fs::path model_dir(const std::string& method, const RunConfig& c, const Context& ctx, std::uint64_t seed) {
  const Workspace ws{c.output()};
  return method == "acarec" ? ws.acarec_model(acarec_config(c.model, ctx), seed) : ws.deepmusic_model(method, seed);
}

inline void train_cold(const RunConfig& c, const std::string& method, std::ostream& log) {
  require_method(method, {"acarec", "deepmusic", "deepmusic+am"});
  const auto ctx = load_context(c);
  log << "train-cold " << method << "\n";
  for (auto seed : c.seeds) {
    auto m = make_model(method, c.model, ctx, seed);
    const auto dir = model_dir(method, c, ctx, seed);
    if (!ensure_model(m, dir, c, ctx, seed, log)) log << "  " << dir.string() << ": up to date\n";
  }
}

inline ColdModel load_model(const std::string& method, const RunConfig& c, const Context& ctx, std::uint64_t seed) {
  const auto dir = model_dir(method, c, ctx, seed);
  io::require_file(dir / "manifest.json", method + " checkpoint (run train-cold --method " + method + ")");
  require_current_cf(dir, ctx);
  if (method == "acarec") return coldstart::load_acarec(dir, ctx.fingerprint());
  return coldstart::load_deepmusic(dir, ctx.fingerprint());
}

inline nn::Matrix cold_embeddings(const ColdModel& m, const Context& ctx, std::span<const data::Index> items,
                                  coldstart::ContextMode mode) {
  return std::visit([&](const auto& x) { return coldstart::infer_cold_embeddings(x, ctx.bundle(), ctx.cf, items, mode); },
                    m);
}

inline eval::SplitTable test_table(const Context& ctx, const nn::Matrix& e, std::size_t k,
                                   eval::MetricsReport* full = nullptr) {
  const auto& b = ctx.bundle();
  const auto items = b.cold_test_items();
  auto r = eval::evaluate_embeddings(b, b.test_interactions, items, ctx.cf.P, e, k);
  const auto t = r.splits;
  if (full) *full = std::move(r);
  return t;
}

// Gaussian embeddings with the spread of the hot item embeddings.
inline nn::Matrix random_embeddings(const cf::CFEmbeddings& cf, std::size_t rows, std::uint64_t seed) {
  double sum = 0, sq = 0;
  for (float v : cf.E.flat()) {
    sum += v;
    sq += double(v) * v;
  }
  const double n = static_cast<double>(cf.E.size());
  const double sd = std::sqrt(std::max(sq / n - (sum / n) * (sum / n), 0.0));
  Rng rng = make_rng(seed, 11);
  nn::Matrix out(rows, cf.dim());
  for (auto& v : out.flat()) v = static_cast<float>(normal(rng, 0.0, sd));
  return out;
}

// ---------------------------------------------------------------------------
// eval

inline eval::RunReport evaluate_method(const RunConfig& c, const std::string& method, const Context& ctx) {
  require_method(method, eval_methods());
  const auto& b = ctx.bundle();
  const auto items = b.cold_test_items();
  const auto mode = context_mode(c.eval.context);
  eval::RunReport report;
  report.method = method;
  report.context = context_name(c.eval.context);
  report.k = c.eval.k;
  std::vector<eval::MetricsReport> runs;
  auto add = [&](std::uint64_t seed, eval::MetricsReport r) {
    report.seeds.push_back(seed);
    report.per_seed.push_back(r.splits);
    runs.push_back(std::move(r));
  };
  auto embedded = [&](std::uint64_t seed, const nn::Matrix& e) {
    add(seed, eval::evaluate_embeddings(b, b.test_interactions, items, ctx.cf.P, e, c.eval.k));
  };

  if (method == "acarec" || method == "deepmusic" || method == "deepmusic+am") {
    for (auto seed : c.seeds) embedded(seed, cold_embeddings(load_model(method, c, ctx, seed), ctx, items, mode));
  } else if (method == "random") {
    for (auto seed : c.seeds) embedded(seed, random_embeddings(ctx.cf, items.size(), seed));
  } else if (method == "paf") {
    add(c.seeds.front(), eval::evaluate(b, b.test_interactions, items, coldstart::paf_ranker(b), c.eval.k));
  } else {
    // deterministic heuristics are evaluated once
    using coldstart::Heuristic;
    Heuristic kind = Heuristic::ArtistMean;
    double tau = 0;
    if (method == "artistmeanpop") kind = Heuristic::ArtistMeanPop;
    if (method == "artistmeancontsim") {
      kind = Heuristic::ArtistMeanContSim;
      tau = coldstart::tune_tau(b, ctx.cf, c.heuristics.tau_grid, c.eval.k);
      report.params["tau"] = tau;
    }
    embedded(c.seeds.front(), coldstart::heuristic_embeddings(kind, b, ctx.cf, items, tau, mode));
  }
  report.quintiles = eval::quintile_series(b, b.test_interactions, runs);
  return report;
}

inline void write_report(const fs::path& dir, const eval::RunReport& r, const RunConfig& c) {
  io::write_text(dir / "report.txt", eval::format_report_text(r));
  io::write_text(dir / "report.json", dump(eval::report_json(r)));
  if (r.quintiles) io::write_text(dir / "quintiles.tsv", eval::format_quintile_tsv(*r.quintiles));
  echo_config(dir, c);
}

inline std::string metric_cell(const eval::SplitMetrics& m, double eval::SplitMetrics::*field) {
  return m.present ? io::format_double(m.*field, 4) : "-";
}

inline std::string format_summary(const std::vector<eval::RunReport>& reports) {
  std::string out = "method\tcontext\tseeds\toverall_recall\toverall_ndcg\tdiscovery_recall\tdiscovery_ndcg\t"
                    "exploit_recall\texploit_ndcg\n";
  for (const auto& r : reports) {
    const auto m = r.mean();
    out += r.method + "\t" + r.context + "\t" + std::to_string(r.seeds.size());
    for (const auto& s : m) out += "\t" + metric_cell(s, &eval::SplitMetrics::recall) + "\t" + metric_cell(s, &eval::SplitMetrics::ndcg);
    out += "\n";
  }
  return out;
}

inline std::vector<eval::RunReport> evaluate_methods(const RunConfig& c, const std::vector<std::string>& methods,
                                                     std::ostream& log) {
  for (const auto& m : methods) require_method(m, eval_methods());
  const auto ctx = load_context(c);
  const Workspace ws{c.output()};
  std::vector<eval::RunReport> out;
  for (const auto& m : methods) {
    out.push_back(evaluate_method(c, m, ctx));
    write_report(ws.eval(m, c.eval.context), out.back(), c);
  }
  log << format_summary(out);
  return out;
}

// ---------------------------------------------------------------------------
// ablate

struct AblationRow {
  coldstart::ACARecConfig config;
  std::vector<eval::SplitTable> per_seed;

  eval::SplitTable mean() const {
    eval::RunReport r;
    r.per_seed = per_seed;
    return r.mean();
  }
};

struct AblationReport {
  std::vector<std::uint64_t> seeds;
  std::vector<AblationRow> rows;

  // Row with the highest Overall NDCG for a seed; ties keep the earlier row.
  std::size_t best_row(std::size_t seed_index) const {
    std::size_t best = 0;
    for (std::size_t r = 1; r < rows.size(); ++r)
      if (rows[r].per_seed[seed_index][0].ndcg > rows[best].per_seed[seed_index][0].ndcg) best = r;
    return best;
  }
};

// The six single-component ablations followed by the full model.
inline std::vector<coldstart::ACARecConfig> ablation_grid(const coldstart::ACARecConfig& base) {
  using coldstart::Fusion;
  const std::vector<std::tuple<bool, bool, Fusion>> grid = {
      {false, false, Fusion::Gru},     {true, false, Fusion::Gru}, {false, true, Fusion::Gru},
      {true, true, Fusion::Direct},    {true, true, Fusion::Residual}, {true, true, Fusion::Glu},
      {true, true, Fusion::Gru}};
  std::vector<coldstart::ACARecConfig> out;
  for (const auto& [sa, ci, f] : grid) {
    auto c = base;
    c.self_attention = sa;
    c.content_input = ci;
    c.fusion = f;
    out.push_back(c);
  }
  return out;
}

inline std::string format_ablation(const AblationReport& a) {
  std::string out = "config\tself_attention\tcontent_input\tfusion\toverall_ndcg\tdiscovery_ndcg\texploit_ndcg";
  for (auto s : a.seeds) out += "\tseed" + std::to_string(s) + "_overall_ndcg";
  out += "\n";
  for (const auto& row : a.rows) {
    const auto m = row.mean();
    out += row.config.label() + "\t" + (row.config.self_attention ? "yes" : "no") + "\t" +
           (row.config.content_input ? "yes" : "no") + "\t" + std::string(coldstart::to_string(row.config.fusion));
    for (const auto& s : m) out += "\t" + metric_cell(s, &eval::SplitMetrics::ndcg);
    for (const auto& t : row.per_seed) out += "\t" + io::format_double(t[0].ndcg, 4);
    out += "\n";
  }
  return out;
}

inline AblationReport ablate(const RunConfig& c, std::ostream& log) {
  const auto ctx = load_context(c);
  const Workspace ws{c.output()};
  const auto items = ctx.bundle().cold_test_items();
  AblationReport a;
  a.seeds = c.seeds;
  log << "ablate: " << ablation_grid(c.model).size() << " configurations x " << c.seeds.size() << " seeds\n";
  for (const auto& cfg : ablation_grid(acarec_config(c.model, ctx))) {
    AblationRow row{cfg, {}};
    for (auto seed : c.seeds) {
      ColdModel m = coldstart::ACARecModel::create(cfg, seed);
      ensure_model(m, ws.acarec_model(cfg, seed), c, ctx, seed, log);
      row.per_seed.push_back(test_table(ctx, cold_embeddings(m, ctx, items, coldstart::ContextMode::full()), c.eval.k));
    }
    a.rows.push_back(std::move(row));
  }
  json j = {{"seeds", a.seeds}, {"k", c.eval.k}, {"rows", json::array()}};
  for (const auto& row : a.rows) {
    json per = json::object();
    for (std::size_t i = 0; i < a.seeds.size(); ++i) per[std::to_string(a.seeds[i])] = eval::detail::split_json(row.per_seed[i]);
    j["rows"].push_back({{"config", to_json(row.config)}, {"label", row.config.label()}, {"per_seed", per},
                         {"mean", eval::detail::split_json(row.mean())}});
  }
  std::string winners;
  for (std::size_t i = 0; i < a.seeds.size(); ++i)
    winners += "seed " + std::to_string(a.seeds[i]) + " best " + a.rows[a.best_row(i)].config.label() + "\n";
  const auto table = format_ablation(a);
  io::write_text(ws.ablate() / "report.tsv", table);
  io::write_text(ws.ablate() / "report.json", dump(j));
  echo_config(ws.ablate(), c);
  log << table << winners;
  return a;
}

// ---------------------------------------------------------------------------
// sweep-context

struct SweepPoint {
  std::string axis;  // "train" or "inference"
  std::size_t n = 0;  // 0: full catalog at inference
  std::vector<double> overall_ndcg;  // per seed
};

inline std::vector<SweepPoint> sweep_context(const RunConfig& c, std::ostream& log) {
  const auto ctx = load_context(c);
  const Workspace ws{c.output()};
  const auto items = ctx.bundle().cold_test_items();
  std::vector<SweepPoint> points;
  log << "sweep-context: training sizes\n";
  for (auto n : c.sweep.train_sizes) {
    SweepPoint p{"train", n, {}};
    auto cfg = acarec_config(c.model, ctx);
    cfg.train_context = n;
    for (auto seed : c.seeds) {
      ColdModel m = coldstart::ACARecModel::create(cfg, seed);
      const auto dir = n == c.model.train_context ? ws.acarec_model(cfg, seed) : ws.sweep_model(n, seed);
      ensure_model(m, dir, c, ctx, seed, log);
      p.overall_ndcg.push_back(
          test_table(ctx, cold_embeddings(m, ctx, items, coldstart::ContextMode::full()), c.eval.k)[0].ndcg);
    }
    points.push_back(std::move(p));
  }
  log << "sweep-context: inference TopN\n";
  std::vector<ColdModel> models;
  const auto cfg = acarec_config(c.model, ctx);
  for (auto seed : c.seeds) {
    models.push_back(coldstart::ACARecModel::create(cfg, seed));
    ensure_model(models.back(), ws.acarec_model(cfg, seed), c, ctx, seed, log);
  }
  auto grid = c.sweep.top_n;
  grid.push_back(0);
  for (auto n : grid) {
    SweepPoint p{"inference", n, {}};
    for (const auto& m : models)
      p.overall_ndcg.push_back(test_table(ctx, cold_embeddings(m, ctx, items, context_mode(n)), c.eval.k)[0].ndcg);
    points.push_back(std::move(p));
  }

  std::string table = "axis\tn\toverall_ndcg_mean";
  for (auto s : c.seeds) table += "\tseed" + std::to_string(s);
  table += "\n";
  json j = json::array();
  for (const auto& p : points) {
    double mean = 0;
    for (double v : p.overall_ndcg) mean += v;
    mean /= static_cast<double>(p.overall_ndcg.size());
    table += p.axis + "\t" + (p.n ? std::to_string(p.n) : "full") + "\t" + io::format_double(mean, 4);
    for (double v : p.overall_ndcg) table += "\t" + io::format_double(v, 4);
    table += "\n";
    j.push_back({{"axis", p.axis}, {"n", p.n ? json(p.n) : json("full")}, {"overall_ndcg", p.overall_ndcg},
                 {"mean", mean}});
  }
  io::write_text(ws.sweep() / "report.tsv", table);
  io::write_text(ws.sweep() / "report.json", dump({{"seeds", c.seeds}, {"k", c.eval.k}, {"points", j}}));
  echo_config(ws.sweep(), c);
  log << table;
  return points;
}

}  // namespace acarec::cli
