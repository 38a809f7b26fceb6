#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "acarec/eval/evaluate.hpp"
#include "acarec/eval/quintiles.hpp"
#include "acarec/io.hpp"
#include "json.hpp"

namespace acarec::eval {

using SplitTable = std::array<SplitMetrics, 3>;

// Quintile series averaged over seeds. `discovery_recall` is absent for
// methods without Discovery rankings.
struct QuintileSeries {
  std::array<double, 5> prediction_share{}, hits{}, artist_hit_rate{};
  std::optional<std::array<double, 5>> discovery_recall;
};

struct RunReport {
  std::string method;
  std::string context = "full";
  std::size_t k = 20;
  std::map<std::string, double> params;  // tuned settings, e.g. tau
  std::vector<std::uint64_t> seeds;
  std::vector<SplitTable> per_seed;  // aligned with seeds
  std::optional<QuintileSeries> quintiles;

  // A split is present in the mean only if every seed has it.
  SplitTable mean() const {
    SplitTable out{};
    for (std::size_t s = 0; s < 3; ++s) {
      auto& m = out[s];
      m.present = !per_seed.empty();
      for (const auto& t : per_seed) {
        m.present = m.present && t[s].present;
        m.hr += t[s].hr;
        m.recall += t[s].recall;
        m.ndcg += t[s].ndcg;
      }
      if (!m.present) {
        m = SplitMetrics{false};
        continue;
      }
      const double n = static_cast<double>(per_seed.size());
      m.users = per_seed.front()[s].users;
      m.hr /= n;
      m.recall /= n;
      m.ndcg /= n;
    }
    return out;
  }
};

inline QuintileSeries quintile_series(const data::DatasetBundle& b, const std::vector<data::EvalInteraction>& part,
                                      const std::vector<MetricsReport>& reports) {
  QuintileSeries q;
  const bool discovery = !reports.empty() && reports.front().at(Split::Discovery).present;
  if (discovery) q.discovery_recall.emplace();
  for (const auto& r : reports) {
    const auto pop = popularity_quintiles(b, part, r);
    for (std::size_t g = 0; g < 5; ++g) {
      q.prediction_share[g] += pop.prediction_share[g];
      q.hits[g] += static_cast<double>(pop.hits[g]);
      q.artist_hit_rate[g] += pop.artist_hit_rate[g];
    }
    if (discovery) {
      const auto ua = user_artist_quintiles(b, r);
      for (std::size_t g = 0; g < 5; ++g) (*q.discovery_recall)[g] += ua.mean_recall[g];
    }
  }
  const double n = static_cast<double>(std::max<std::size_t>(reports.size(), 1));
  for (std::size_t g = 0; g < 5; ++g) {
    q.prediction_share[g] /= n;
    q.hits[g] /= n;
    q.artist_hit_rate[g] /= n;
    if (discovery) (*q.discovery_recall)[g] /= n;
  }
  return q;
}

namespace detail {

inline void split_lines(std::string& out, const std::string& prefix, const SplitTable& t) {
  for (Split s : kSplits) {
    const auto& m = t[static_cast<std::size_t>(s)];
    const std::string p = prefix + std::string(to_string(s)) + ".";
    if (!m.present) {
      for (const char* name : {"users", "hr", "recall", "ndcg"}) out += p + name + "=-\n";
      continue;
    }
    out += p + "users=" + std::to_string(m.users) + "\n";
    out += p + "hr=" + io::format_double(m.hr) + "\n";
    out += p + "recall=" + io::format_double(m.recall) + "\n";
    out += p + "ndcg=" + io::format_double(m.ndcg) + "\n";
  }
}

inline nlohmann::json split_json(const SplitTable& t) {
  auto j = nlohmann::json::object();
  for (Split s : kSplits) {
    const auto& m = t[static_cast<std::size_t>(s)];
    j[std::string(to_string(s))] =
        m.present ? nlohmann::json{{"users", m.users}, {"hr", m.hr}, {"recall", m.recall}, {"ndcg", m.ndcg}}
                  : nlohmann::json(nullptr);
  }
  return j;
}

inline std::vector<std::pair<std::string, const std::array<double, 5>*>> series(const QuintileSeries& q) {
  std::vector<std::pair<std::string, const std::array<double, 5>*>> out = {
      {"prediction_share", &q.prediction_share}, {"hits", &q.hits}, {"artist_hit_rate", &q.artist_hit_rate}};
  if (q.discovery_recall) out.emplace_back("discovery_recall", &*q.discovery_recall);
  return out;
}

}  // namespace detail

// key=value, one metric per line. Absent splits print "-".
inline std::string format_report_text(const RunReport& r) {
  std::string out = "method=" + r.method + "\ncontext=" + r.context + "\nk=" + std::to_string(r.k) + "\nseeds=";
  for (std::size_t i = 0; i < r.seeds.size(); ++i) out += (i ? "," : "") + std::to_string(r.seeds[i]);
  out += "\n";
  for (const auto& [name, value] : r.params) out += "param." + name + "=" + io::format_double(value) + "\n";
  for (std::size_t i = 0; i < r.seeds.size(); ++i)
    detail::split_lines(out, "seed." + std::to_string(r.seeds[i]) + ".", r.per_seed[i]);
  detail::split_lines(out, "mean.", r.mean());
  if (r.quintiles)
    for (const auto& [name, values] : detail::series(*r.quintiles))
      for (std::size_t g = 0; g < 5; ++g)
        out += "quintile." + name + "." + std::to_string(g + 1) + "=" + io::format_double((*values)[g]) + "\n";
  return out;
}

// {method, context, k, seeds, params, per_seed: {seed: {split: {users, hr,
// recall, ndcg} | null}}, mean: {...}, quintiles: {series: [5 values]}}
inline nlohmann::json report_json(const RunReport& r) {
  nlohmann::json j = {{"method", r.method}, {"context", r.context}, {"k", r.k}, {"seeds", r.seeds}};
  j["params"] = r.params;
  auto per = nlohmann::json::object();
  for (std::size_t i = 0; i < r.seeds.size(); ++i) per[std::to_string(r.seeds[i])] = detail::split_json(r.per_seed[i]);
  j["per_seed"] = per;
  j["mean"] = detail::split_json(r.mean());
  if (r.quintiles) {
    auto q = nlohmann::json::object();
    for (const auto& [name, values] : detail::series(*r.quintiles)) q[name] = *values;
    j["quintiles"] = q;
  }
  return j;
}

// Quintile series for plotting: one row per series, groups 1 (most popular
// items, most-listened artists, fewest artists per user) to 5.
inline std::string format_quintile_tsv(const QuintileSeries& q) {
  std::string out = "series\tq1\tq2\tq3\tq4\tq5\n";
  for (const auto& [name, values] : detail::series(q)) {
    out += name;
    for (double v : *values) out += "\t" + io::format_double(v);
    out += "\n";
  }
  return out;
}

}  // namespace acarec::eval
