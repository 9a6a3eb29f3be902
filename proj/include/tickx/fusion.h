#ifndef TICKX_FUSION_H_
#define TICKX_FUSION_H_

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "tickx/network.h"
#include "tickx/parser.h"
#include "tickx/tsdb.h"

namespace tickx {

inline constexpr int kNumFusionFeatures = 5;

// Feature order: standardized consistency score, network score s~, missing-s
// indicator, normalized symbol/value distance, relative-change indicator.
const std::array<std::string, kNumFusionFeatures> &fusion_feature_names();

// Consistency scores go through phi(s) = -ln(1 - s / kScoreScale) before
// standardization (s <= 0 from the store; positive s is mirrored). phi(0) = 0,
// and the log spreads the region around the label threshold (s of order
// 1e-4..1e-2) as widely as the long tail down to -81 and beyond, so a linear
// model sees both.
inline constexpr double kScoreScale = 1e-4;
double compress_score(double s);

struct Standardizer {
  double mean = 0.0;
  double stddev = 1.0;

  double apply(double x) const { return (x - mean) / stddev; }
};

// Mean and (population) standard deviation of compress_score over the
// non-missing scores; stddev falls back to 1 when degenerate.
Standardizer fit_standardizer(std::span<const std::optional<double>> scores);

struct FusionFeatures {
  double s = 0.0;  // standardized, 0 when missing
  double s_tilde = 0.0;
  double s_missing = 0.0;
  double pair_distance = 0.0;
  double kind_is_rel = 0.0;

  Eigen::VectorXd vector() const;
};

FusionFeatures fuse_features(const ExtractionCandidate &candidate,
                             const std::optional<ConsistencyScore> &score,
                             const NetworkScore &net,
                             const Standardizer &standardizer,
                             int max_pair_distance);

struct FusionParams {
  Eigen::VectorXd weights = Eigen::VectorXd::Zero(kNumFusionFeatures);
  double bias = 0.0;
  double threshold = 0.5;
  Standardizer standardizer;
  int max_pair_distance = kDefaultMaxPairDistance;

  void validate() const;
};

enum class Decision { kAccept, kReject };

struct FusionDecision {
  Decision decision = Decision::kReject;
  double probability = 0.5;
};

// p = sigma(w . x + b); ACCEPT iff p > threshold.
FusionDecision classify(const FusionParams &params,
                        const FusionFeatures &features);
FusionDecision classify(const FusionParams &params,
                        const Eigen::VectorXd &features);

struct FusionRow {
  FusionFeatures features;
  int label = 0;
};

struct FusionTrainResult {
  FusionParams params;
  double final_loss = 0.0;
};

// Logistic regression by full-batch gradient descent on mean BCE, starting
// from zero weights. Standardizer and threshold are carried over from
// `initial`.
FusionTrainResult train_fusion(std::span<const FusionRow> rows,
                               double learning_rate, int epochs,
                               const FusionParams &initial = {});

// Gradient of mean BCE with respect to (weights, bias).
std::pair<Eigen::VectorXd, double> fusion_gradient(
    const FusionParams &params, std::span<const FusionRow> rows);

void save_fusion_params(const FusionParams &params,
                        const std::filesystem::path &path);
FusionParams load_fusion_params(const std::filesystem::path &path);

}  // namespace tickx

#endif  // TICKX_FUSION_H_
