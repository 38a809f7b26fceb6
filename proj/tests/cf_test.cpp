#include <gtest/gtest.h>

#include <cmath>

#include "acarec/cf/bpr.hpp"
#include "acarec/data/synthetic.hpp"
#include "test_util.hpp"

namespace acarec::cf {
namespace {

std::vector<double> random_vec(std::size_t n, Rng& rng) {
  std::vector<double> v(n);
  for (auto& x : v) x = uniform(rng, -1, 1);
  return v;
}

double loss_of(const std::vector<double>& p, const std::vector<double>& i, const std::vector<double>& j, double l2) {
  return bpr_loss<double>(p, i, j, l2);
}

TEST(BprLoss, EqualScoresGiveLn2) {
  const std::vector<double> p = {1, 2}, i = {0.5, 0.5}, j = {0.5, 0.5};
  EXPECT_NEAR(loss_of(p, i, j, 0.0), 0.693147, 1e-6);
}

TEST(BprLoss, SaturatedMarginLeavesRegularizer) {
  const std::vector<double> p = {100, 0}, i = {100, 0}, j = {-100, 0};
  const double l2 = 1e-4;
  EXPECT_NEAR(loss_of(p, i, j, l2), l2 * 3e4, 1e-9);
}

TEST(BprLoss, GradientMatchesFiniteDifferences) {
  for (int seed = 0; seed < 20; ++seed) {
    Rng rng = make_rng(seed, 31);
    auto p = random_vec(6, rng), i = random_vec(6, rng), j = random_vec(6, rng);
    const double l2 = 0.05;
    std::vector<double> gp(6), gi(6), gj(6);
    bpr_loss<double>(p, i, j, l2, gp, gi, gj);
    const double h = 1e-6;
    for (auto [vec, grad] : {std::pair{&p, &gp}, {&i, &gi}, {&j, &gj}}) {
      for (std::size_t k = 0; k < 6; ++k) {
        const double keep = (*vec)[k];
        (*vec)[k] = keep + h;
        const double up = loss_of(p, i, j, l2);
        (*vec)[k] = keep - h;
        const double down = loss_of(p, i, j, l2);
        (*vec)[k] = keep;
        const double fd = (up - down) / (2 * h);
        EXPECT_LE(std::abs(fd - (*grad)[k]) / std::max({std::abs(fd), std::abs((*grad)[k]), 1e-2}), 1e-4);
      }
    }
  }
}

TEST(Score, BasisAndOrthogonalVectors) {
  CFEmbeddings cf{nn::Matrix::from_rows({{0, 1, 0}}), nn::Matrix::from_rows({{0, 1, 0}, {1, 0, 0}})};
  EXPECT_EQ(score(cf, 0, 0), 1.0f);
  EXPECT_EQ(score(cf, 0, 1), 0.0f);
  EXPECT_THROW(score(cf, 0, 2), Error);
  EXPECT_THROW(score(cf, 1, 0), Error);
}

TEST(Score, MatchesHandDotProduct) {
  Rng rng = make_rng(2);
  CFEmbeddings cf{acarec::testing::random_matrix<float>(4, 8, rng), acarec::testing::random_matrix<float>(5, 8, rng)};
  for (Index u = 0; u < 4; ++u)
    for (Index i = 0; i < 5; ++i) {
      double want = 0;
      for (std::size_t k = 0; k < 8; ++k) want += double(cf.P(u, k)) * cf.E(i, k);
      EXPECT_NEAR(score(cf, u, i), want, 1e-6);
    }
}

TEST(NegativeSampler, NeverReturnsAPositive) {
  Rng rng = make_rng(3);
  const std::vector<Index> positives = {0, 3, 4, 7, 8, 9};
  for (int draw = 0; draw < 10000; ++draw) {
    const Index j = sample_negative(positives, 12, rng);
    EXPECT_LT(j, 12u);
    EXPECT_FALSE(std::binary_search(positives.begin(), positives.end(), j));
  }
}

TEST(Holdout, OnePerEligibleUser) {
  Rng rng = make_rng(4);
  const std::vector<std::vector<Index>> items = {{1, 2, 3}, {4}, {5, 6}};
  const auto h = holdout_one_per_user(items, rng);
  ASSERT_EQ(h.pairs.size(), 2u);
  EXPECT_EQ(h.fit[1], items[1]);
  for (const auto& [u, i] : h.pairs) {
    EXPECT_EQ(h.fit[u].size() + 1, items[u].size());
    EXPECT_FALSE(std::binary_search(h.fit[u].begin(), h.fit[u].end(), i));
  }
}

data::DatasetBundle small_bundle() {
  data::SynthConfig c;
  c.num_users = 600;
  c.num_artists = 60;
  c.num_tracks = 900;
  const auto w = data::gen_synthetic(c, 2);
  return data::build_bundle(w.interactions, w.catalog, c.default_split());
}

TEST(TrainBpr, AucRisesFromChanceAndLossDecreases) {
  const auto b = small_bundle();
  BPRConfig c;
  c.batch_size = 256;
  const auto items = b.user_items();
  Rng split = make_rng(0, 1);
  const auto h = holdout_one_per_user(items, split);
  Rng init_rng = make_rng(0, 2);
  EXPECT_NEAR(heldout_auc(init_embeddings(b.num_users(), b.num_hot, c, init_rng), h.pairs, items), 0.5, 0.05);
  BPRHistory hist;
  const auto cf = fit_bpr(h.fit, b.num_hot, c, 40, &h, &hist, 2);
  EXPECT_GT(heldout_auc(cf, h.pairs, items), 0.85);
  for (std::size_t e = 5; e < hist.loss.size(); ++e) EXPECT_LE(hist.loss[e], hist.loss[e - 5] * 1.02) << "epoch " << e;
}

TEST(TrainBpr, SameSeedGivesIdenticalEmbeddings) {
  const auto b = small_bundle();
  BPRConfig c;
  c.epochs = 4;
  const auto a = train_bpr(b, c);
  const auto again = train_bpr(b, c);
  EXPECT_EQ(a.embeddings.P, again.embeddings.P);
  EXPECT_EQ(a.embeddings.E, again.embeddings.E);
  EXPECT_EQ(a.embeddings.P.rows(), b.num_users());
  EXPECT_EQ(a.embeddings.E.rows(), b.num_hot);
  c.seed = 1;
  EXPECT_NE(train_bpr(b, c).embeddings.P, a.embeddings.P);
}

TEST(TrainBpr, EmptyTrainIsUntrainable) {
  data::DatasetBundle b;
  EXPECT_THROW(train_bpr(b, BPRConfig{}), Error);
}

TEST(CfCheckpoint, RoundTripAndFingerprintCheck) {
  data::DatasetBundle b;
  b.users = {"u0", "u1"};
  b.num_hot = 3;
  Rng rng = make_rng(5);
  CFEmbeddings cf{acarec::testing::random_matrix<float>(2, 4, rng), acarec::testing::random_matrix<float>(3, 4, rng)};
  const auto dir = acarec::testing::scratch_dir("cf_ckpt");
  save_cf(dir, cf, "abc", nlohmann::json::object());
  const auto back = load_cf(dir, b, "abc");
  EXPECT_EQ(back.P, cf.P);
  EXPECT_EQ(back.E, cf.E);
  try {
    load_cf(dir, b, "xyz");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Fingerprint);
  }
}

}  // namespace
}  // namespace acarec::cf
