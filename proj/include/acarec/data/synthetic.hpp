#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "acarec/data/catalog.hpp"
#include "acarec/data/interactions.hpp"
#include "acarec/data/bundle.hpp"
#include "acarec/io.hpp"
#include "acarec/nn/matrix.hpp"
#include "acarec/nn/random.hpp"

namespace acarec::data {

// Planted-factor world. Every artist has a latent taste vector and a few
// style directions; a track's latent is
//   artist + track_noise * (sqrt(style_share) * style + sqrt(1 - style_share) * eps)
// and its content vector is a rank-`content_rank` linear view of that latent
// plus isotropic noise. A share of tracks are atypical: their latent is drawn
// independently of the artist at the same overall scale. Users pick tracks
// without replacement with weights
// exp(signal * <user, track> / sqrt(latent_dim) + popularity).
struct SynthConfig {
  std::size_t num_users = 2000;
  std::size_t num_artists = 300;
  std::size_t num_tracks = 5000;
  std::size_t min_tracks_per_artist = 2;
  double artist_size_skew = 0.8;  // Zipf exponent for the remaining tracks
  std::size_t latent_dim = 16;
  std::size_t content_dim = 32;
  std::size_t content_rank = 8;
  std::size_t styles_per_artist = 3;
  double style_share = 0.7;
  double track_noise = 0.8;
  double atypical_share = 0.0;
  double content_noise = 0.3;
  double popularity_spread = 0.5;
  double signal = 3.0;
  std::size_t min_user_interactions = 20;
  double mean_extra_interactions = 25.0;
  double back_catalog_share = 0.6;  // tracks released at time 0
  std::int64_t horizon_seconds = 360LL * 86400;

  void validate() const {
    auto bad = [](const std::string& why) { fail(ErrorKind::Config, "synthetic config: " + why); };
    if (num_users == 0) bad("num_users must be positive");
    if (num_artists == 0) bad("num_artists must be positive");
    if (min_tracks_per_artist == 0) bad("min_tracks_per_artist must be positive");
    if (num_tracks < num_artists * min_tracks_per_artist) bad("num_tracks < num_artists * min_tracks_per_artist");
    if (latent_dim == 0 || content_dim == 0) bad("dimensions must be positive");
    if (content_rank == 0 || content_rank > latent_dim) bad("content_rank must lie in [1, latent_dim]");
    if (styles_per_artist == 0) bad("styles_per_artist must be positive");
    if (style_share < 0 || style_share > 1) bad("style_share must lie in [0, 1]");
    if (atypical_share < 0 || atypical_share > 1) bad("atypical_share must lie in [0, 1]");
    if (track_noise < 0 || content_noise < 0 || popularity_spread < 0) bad("noise levels must be non-negative");
    if (min_user_interactions == 0 || min_user_interactions > num_tracks) bad("min_user_interactions out of range");
    if (mean_extra_interactions < 0) bad("mean_extra_interactions must be non-negative");
    if (back_catalog_share < 0 || back_catalog_share > 1) bad("back_catalog_share must lie in [0, 1]");
    if (horizon_seconds <= 0) bad("horizon_seconds must be positive");
  }

  // Window layout matching the generator's timeline: one year, the last
  // weeks held out for cold validation and test.
  SplitSpec default_split() const {
    SplitSpec s;
    s.train_start = 0;
    s.train_end = horizon_seconds * 3 / 4;
    s.val_end = horizon_seconds * 82 / 100;
    s.test_end = horizon_seconds;
    return s;
  }
};

struct SyntheticWorld {
  std::vector<Interaction> interactions;  // sorted by (user, item)
  Catalog catalog;
  std::vector<std::string> user_tokens, track_tokens, artist_tokens;
  std::vector<std::size_t> track_artist;
  nn::MatrixD artist_latent;  // artists x latent_dim
  nn::MatrixD track_latent;   // tracks x latent_dim
  nn::MatrixD user_latent;    // users x latent_dim
  std::vector<double> track_popularity;

  // Planted scoring as dot products: user [signal/sqrt(d) * p_u, 1],
  // track [t_i, popularity_i].
  nn::MatrixD planted_user_embeddings(const SynthConfig& c) const {
    nn::MatrixD out(user_latent.rows(), user_latent.cols() + 1);
    const double scale = c.signal / std::sqrt(static_cast<double>(c.latent_dim));
    for (std::size_t u = 0; u < out.rows(); ++u) {
      for (std::size_t j = 0; j < user_latent.cols(); ++j) out(u, j) = scale * user_latent(u, j);
      out(u, user_latent.cols()) = 1.0;
    }
    return out;
  }
  nn::MatrixD planted_track_embeddings() const {
    nn::MatrixD out(track_latent.rows(), track_latent.cols() + 1);
    for (std::size_t i = 0; i < out.rows(); ++i) {
      for (std::size_t j = 0; j < track_latent.cols(); ++j) out(i, j) = track_latent(i, j);
      out(i, track_latent.cols()) = track_popularity[i];
    }
    return out;
  }
};

namespace detail {
inline std::string token(char prefix, std::size_t i, std::size_t width) {
  std::string digits = std::to_string(i);
  return std::string(1, prefix) + std::string(width > digits.size() ? width - digits.size() : 0, '0') + digits;
}
}  // namespace detail

inline SyntheticWorld gen_synthetic(const SynthConfig& c, std::uint64_t seed) {
  c.validate();
  SyntheticWorld w;
  Rng structure = make_rng(seed, 1);
  Rng latents = make_rng(seed, 2);
  Rng content_rng = make_rng(seed, 3);
  Rng behaviour = make_rng(seed, 4);

  const std::size_t width = std::to_string(std::max({c.num_users, c.num_tracks, c.num_artists})).size();
  for (std::size_t a = 0; a < c.num_artists; ++a) w.artist_tokens.push_back(detail::token('a', a, width));
  for (std::size_t t = 0; t < c.num_tracks; ++t) w.track_tokens.push_back(detail::token('t', t, width));
  for (std::size_t u = 0; u < c.num_users; ++u) w.user_tokens.push_back(detail::token('u', u, width));

  // Tracks per artist: a floor for everyone, the rest Zipf-distributed.
  for (std::size_t a = 0; a < c.num_artists; ++a)
    for (std::size_t k = 0; k < c.min_tracks_per_artist; ++k) w.track_artist.push_back(a);
  std::vector<double> cumulative(c.num_artists);
  double total = 0;
  for (std::size_t a = 0; a < c.num_artists; ++a) {
    total += 1.0 / std::pow(static_cast<double>(a + 1), c.artist_size_skew);
    cumulative[a] = total;
  }
  while (w.track_artist.size() < c.num_tracks) {
    const double r = uniform01(structure) * total;
    const auto a = static_cast<std::size_t>(std::upper_bound(cumulative.begin(), cumulative.end(), r) - cumulative.begin());
    w.track_artist.push_back(std::min(a, c.num_artists - 1));
  }
  shuffle(w.track_artist, structure);

  const std::size_t d = c.latent_dim;
  w.artist_latent = nn::MatrixD(c.num_artists, d);
  for (auto& v : w.artist_latent.flat()) v = normal(latents);
  std::vector<nn::MatrixD> styles(c.num_artists, nn::MatrixD(c.styles_per_artist, d));
  for (auto& s : styles)
    for (auto& v : s.flat()) v = normal(latents);
  std::vector<double> artist_pop(c.num_artists);
  for (auto& p : artist_pop) p = normal(latents, 0.0, c.popularity_spread);

  w.track_latent = nn::MatrixD(c.num_tracks, d);
  w.track_popularity.resize(c.num_tracks);
  const double share = std::sqrt(c.style_share);
  const double rest = std::sqrt(1.0 - c.style_share);
  const double atypical_scale = std::sqrt(1.0 + c.track_noise * c.track_noise);
  Rng atypical = make_rng(seed, 5);
  for (std::size_t t = 0; t < c.num_tracks; ++t) {
    const std::size_t a = w.track_artist[t];
    const auto style = static_cast<std::size_t>(uniform_index(latents, c.styles_per_artist));
    for (std::size_t j = 0; j < d; ++j) {
      const double eps = normal(latents);
      w.track_latent(t, j) = w.artist_latent(a, j) + c.track_noise * (share * styles[a](style, j) + rest * eps);
    }
    if (uniform01(atypical) < c.atypical_share)
      for (std::size_t j = 0; j < d; ++j) w.track_latent(t, j) = atypical_scale * normal(atypical);
    w.track_popularity[t] = artist_pop[a] + normal(latents, 0.0, 0.5 * c.popularity_spread);
  }

  w.user_latent = nn::MatrixD(c.num_users, d);
  for (auto& v : w.user_latent.flat()) v = normal(latents);

  // Content: x = B C t + noise with B (d_c x r), C (r x d).
  nn::MatrixD b(c.content_dim, c.content_rank), cproj(c.content_rank, d);
  for (auto& v : b.flat()) v = normal(content_rng) / std::sqrt(static_cast<double>(c.content_rank));
  for (auto& v : cproj.flat()) v = normal(content_rng) / std::sqrt(static_cast<double>(d));
  const nn::MatrixD mix = nn::matmul(b, cproj);
  w.catalog.content_dim = c.content_dim;
  for (std::size_t t = 0; t < c.num_tracks; ++t) {
    std::vector<float> x(c.content_dim);
    double norm = 0;
    for (std::size_t k = 0; k < c.content_dim; ++k) {
      double v = 0;
      for (std::size_t j = 0; j < d; ++j) v += mix(k, j) * w.track_latent(t, j);
      x[k] = static_cast<float>(v + normal(content_rng, 0.0, c.content_noise));
      norm += double(x[k]) * x[k];
    }
    if (norm == 0.0) x[0] = 1e-3f;  // content vectors must be nonzero
    w.catalog.content[w.track_tokens[t]] = std::move(x);
    w.catalog.artist_of[w.track_tokens[t]] = w.artist_tokens[w.track_artist[t]];
  }

  // Release times and interactions.
  std::vector<std::int64_t> release(c.num_tracks, 0);
  for (auto& r : release)
    if (uniform01(behaviour) >= c.back_catalog_share)
      r = static_cast<std::int64_t>(uniform01(behaviour) * static_cast<double>(c.horizon_seconds));

  const double scale = c.signal / std::sqrt(static_cast<double>(d));
  std::vector<std::pair<double, std::size_t>> keys(c.num_tracks);
  for (std::size_t u = 0; u < c.num_users; ++u) {
    std::size_t n = c.min_user_interactions;
    if (c.mean_extra_interactions > 0) {
      // geometric with the requested mean
      const double p = 1.0 / (1.0 + c.mean_extra_interactions);
      double r = uniform01(behaviour);
      while (r <= 0.0) r = uniform01(behaviour);
      n += static_cast<std::size_t>(std::floor(std::log(r) / std::log1p(-p)));
    }
    n = std::min(n, c.num_tracks);
    // Gumbel top-n: weighted sampling without replacement.
    for (std::size_t t = 0; t < c.num_tracks; ++t) {
      double s = 0;
      for (std::size_t j = 0; j < d; ++j) s += w.user_latent(u, j) * w.track_latent(t, j);
      double r = uniform01(behaviour);
      while (r <= 0.0) r = uniform01(behaviour);
      keys[t] = {scale * s + w.track_popularity[t] - std::log(-std::log(r)), t};
    }
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(n), keys.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t t = keys[k].second;
      const double span = static_cast<double>(c.horizon_seconds - release[t]);
      const auto ts = release[t] + static_cast<std::int64_t>(uniform01(behaviour) * span);
      w.interactions.push_back({w.user_tokens[u], w.track_tokens[t], std::min(ts, c.horizon_seconds - 1)});
    }
  }
  w.interactions = dedup_earliest(std::move(w.interactions));
  return w;
}

inline void write_synthetic(const SyntheticWorld& w, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  io::write_text(dir / "interactions.tsv", format_interactions(w.interactions));
  io::write_text(dir / "artists.tsv", format_artists(w.catalog));
  io::write_text(dir / "content.vec", format_content(w.catalog));
}

}  // namespace acarec::data
