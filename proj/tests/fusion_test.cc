#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "tickx/errors.h"
#include "tickx/fusion.h"

namespace tickx {
namespace {

FusionFeatures features(double s, double s_tilde, double missing = 0, double dist = 0,
                        double rel = 0) {
  return {s, s_tilde, missing, dist, rel};
}

TEST(Fusion, ConsistentReadingIsAccepted) {
  FusionParams p;
  p.weights << 2.0, 1.0, -3.0, -1.0, 0.0;
  p.bias = 0.5;
  // s = 0 with a confident network
  EXPECT_EQ(classify(p, features(0.0, 3.0)).decision, Decision::kAccept);
  // implausible reading, network unsure
  EXPECT_EQ(classify(p, features(-4.0, 0.0)).decision, Decision::kReject);
}

TEST(Fusion, ThresholdIsStrict) {
  FusionParams p;  // zero weights: p = 0.5 exactly
  EXPECT_EQ(classify(p, features(1, 1)).probability, 0.5);
  EXPECT_EQ(classify(p, features(1, 1)).decision, Decision::kReject);
  p.threshold = std::nextafter(0.5, 0.0);
  EXPECT_EQ(classify(p, features(1, 1)).decision, Decision::kAccept);
}

TEST(Fusion, RaisingPositivelyWeightedFeatureNeverRejects) {
  FusionParams p;
  p.weights << 0.7, 1.3, -2.0, -0.5, 0.2;
  p.bias = -0.4;
  std::mt19937_64 rng(7);
  std::normal_distribution<double> z;
  for (int k = 0; k < 500; ++k) {
    auto f = features(z(rng), z(rng), rng() % 2, std::abs(z(rng)), rng() % 2);
    const bool before = classify(p, f).decision == Decision::kAccept;
    f.s_tilde += std::abs(z(rng));
    if (before) EXPECT_EQ(classify(p, f).decision, Decision::kAccept);
  }
}

TEST(Fusion, HugeBiasAcceptsEverything) {
  FusionParams p;
  p.weights << -5.0, -5.0, -5.0, -5.0, -5.0;
  p.bias = 1e6;
  EXPECT_EQ(classify(p, features(-10, -10, 1, 1, 1)).decision, Decision::kAccept);
}

TEST(Fusion, PositiveScalingKeepsDecisions) {
  FusionParams p;
  p.weights << 0.7, 1.3, -2.0, -0.5, 0.2;
  p.bias = -0.4;
  auto q = p;
  q.weights *= 3.7;
  q.bias *= 3.7;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> z;
  for (int k = 0; k < 500; ++k) {
    const auto f = features(z(rng), z(rng), rng() % 2, std::abs(z(rng)), rng() % 2);
    EXPECT_EQ(classify(p, f).decision, classify(q, f).decision);
  }
}

TEST(Fusion, MissingIndicatorCarriesInformation) {
  FusionParams p;
  p.weights << 1.0, 0.0, -4.0, 0.0, 0.0;
  p.bias = 1.0;
  EXPECT_EQ(classify(p, features(0, 0, 0)).decision, Decision::kAccept);
  EXPECT_EQ(classify(p, features(0, 0, 1)).decision, Decision::kReject);
}

TEST(Fusion, DistanceIsNormalizedByWindow) {
  ExtractionCandidate c;
  c.symbol_span = {0, 10};
  c.value_span = {90, 94};
  EXPECT_EQ(fuse_features(c, std::nullopt, {}, {}, 160).pair_distance, 0.5);
}

TEST(Fusion, OneDimensionalSeparable) {
  std::vector<FusionRow> rows;
  for (int k = -20; k <= 20; ++k) {
    if (k == 0) continue;
    rows.push_back({features(0, k * 0.1), k > 0 ? 1 : 0});
  }
  const auto fit = train_fusion(rows, 0.5, 2000);
  for (const auto &r : rows) {
    EXPECT_EQ(classify(fit.params, r.features).decision == Decision::kAccept, r.label == 1);
  }
}

TEST(Fusion, CompressedScore) {
  EXPECT_EQ(compress_score(0.0), 0.0);
  for (double s : {-4e-4, -0.0025, -1.0, -81.0, -1e6}) {
    const double want = -std::log((1e-4 - s) / 1e-4);
    EXPECT_NEAR(compress_score(s), want, 1e-12 * std::abs(want));
  }
  double last = 1.0;
  for (double s = 0.0; s > -100; s -= 0.5) {
    EXPECT_LT(compress_score(s), last);
    last = compress_score(s);
  }
}

TEST(Fusion, FeaturesFromCandidate) {
  ExtractionCandidate c;
  c.kind = RelationKind::kTickRel;
  c.symbol_span = {0, 10};
  c.value_span = {30, 34};
  Standardizer st{-1.0, 2.0};
  const auto f = fuse_features(c, ConsistencyScore{0.0, 5, 0}, NetworkScore{0.8, 1.5}, st, 40);
  EXPECT_EQ(f.s, 0.5);
  EXPECT_EQ(f.s_missing, 0.0);
  EXPECT_EQ(f.pair_distance, 0.5);
  EXPECT_EQ(f.kind_is_rel, 1.0);
  EXPECT_EQ(f.s_tilde, 1.5);
  const auto m = fuse_features(c, std::nullopt, NetworkScore{0.8, 1.5}, st, 40);
  EXPECT_EQ(m.s, 0.0);
  EXPECT_EQ(m.s_missing, 1.0);
}

TEST(Fusion, StandardizerIsPopulationMoments) {
  std::vector<std::optional<double>> s = {0.0, std::nullopt, -1.0, -3.0};
  const auto st = fit_standardizer(s);
  const double a = 0.0, b = -std::log(1.0 + 1e4), c = -std::log(1.0 + 3e4);
  const double mean = (a + b + c) / 3;
  const double var = ((a - mean) * (a - mean) + (b - mean) * (b - mean) + (c - mean) * (c - mean)) / 3;
  EXPECT_NEAR(st.mean, mean, 1e-14);
  EXPECT_NEAR(st.stddev, std::sqrt(var), 1e-14);
  std::vector<std::optional<double>> same = {-1.0, -1.0};
  EXPECT_EQ(fit_standardizer(same).stddev, 1.0);
}

std::vector<FusionRow> random_rows(int n, std::uint64_t seed, bool separable) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<FusionRow> rows;
  for (int k = 0; k < n; ++k) {
    FusionRow r;
    r.features = features(z(rng), z(rng), rng() % 5 == 0, std::abs(z(rng)), rng() % 2);
    const double score = 2 * r.features.s + r.features.s_tilde - r.features.pair_distance;
    r.label = separable ? score > 0 : (score + z(rng) > 0);
    rows.push_back(r);
  }
  return rows;
}

TEST(Fusion, GradientMatchesFiniteDifferences) {
  const auto rows = random_rows(50, 1, false);
  FusionParams p;
  p.weights << 0.3, -0.2, 0.5, 0.1, -0.4;
  p.bias = 0.2;
  const auto [gw, gb] = fusion_gradient(p, rows);
  auto loss = [&](const FusionParams &q) {
    double t = 0;
    for (const auto &r : rows) {
      t += bce_loss(sigmoid(q.weights.dot(r.features.vector()) + q.bias), r.label);
    }
    return t / rows.size();
  };
  const double h = 1e-6;
  for (int k = 0; k < kNumFusionFeatures; ++k) {
    auto up = p, down = p;
    up.weights(k) += h;
    down.weights(k) -= h;
    EXPECT_NEAR(gw(k), (loss(up) - loss(down)) / (2 * h), 1e-8);
  }
  auto up = p, down = p;
  up.bias += h;
  down.bias -= h;
  EXPECT_NEAR(gb, (loss(up) - loss(down)) / (2 * h), 1e-8);
  double mean = 0;
  for (const auto &r : rows) mean += sigmoid(p.weights.dot(r.features.vector()) + p.bias) - r.label;
  EXPECT_NEAR(gb, mean / rows.size(), 1e-15);
}

TEST(Fusion, SeparableRowsAreFitted) {
  const auto rows = random_rows(300, 2, true);
  const auto fit = train_fusion(rows, 0.5, 3000);
  int errors = 0;
  for (const auto &r : rows) {
    errors += (classify(fit.params, r.features).decision == Decision::kAccept) != (r.label == 1);
  }
  EXPECT_LE(errors, 3);
  EXPECT_LT(fit.final_loss, 0.1);
  EXPECT_GT(fit.params.weights(0), 0.0);
}

TEST(Fusion, SingleClassGoesToThatClass) {
  auto rows = random_rows(40, 3, true);
  for (auto &r : rows) r.label = 1;
  const auto fit = train_fusion(rows, 0.5, 500);
  for (const auto &r : rows) {
    EXPECT_EQ(classify(fit.params, r.features).decision, Decision::kAccept);
  }
  EXPECT_THROW(train_fusion({}, 0.5, 10), EmptyDataset);
}

TEST(Fusion, SaveLoadRoundTrip) {
  FusionParams p;
  p.weights << 0.1, -2.5, 1e-3, 3.0, -0.7;
  p.bias = 0.1 + 0.2;
  p.threshold = 0.4;
  p.standardizer = {-1.25, 0.3};
  p.max_pair_distance = 77;
  const auto path = std::filesystem::temp_directory_path() / "tickx_fusion_test.json";
  save_fusion_params(p, path);
  const auto q = load_fusion_params(path);
  EXPECT_EQ(q.weights, p.weights);
  EXPECT_EQ(q.bias, p.bias);
  EXPECT_EQ(q.threshold, p.threshold);
  EXPECT_EQ(q.standardizer.mean, p.standardizer.mean);
  EXPECT_EQ(q.standardizer.stddev, p.standardizer.stddev);
  EXPECT_EQ(q.max_pair_distance, 77);
  std::filesystem::remove(path);
}

TEST(Fusion, ValidationErrors) {
  FusionParams p;
  p.threshold = 1.0;
  EXPECT_THROW(p.validate(), ConfigError);
  p.threshold = 0.5;
  p.weights = Eigen::VectorXd::Zero(3);
  EXPECT_THROW(p.validate(), DimensionMismatch);
  EXPECT_THROW(classify(FusionParams{}, Eigen::VectorXd(Eigen::VectorXd::Zero(4))),
               DimensionMismatch);
}

}  // namespace
}  // namespace tickx
