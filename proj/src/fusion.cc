#include "tickx/fusion.h"

#include <cmath>

#include "tickx/errors.h"
#include "tickx/io.h"

namespace tickx {

const std::array<std::string, kNumFusionFeatures> &fusion_feature_names() {
  static const std::array<std::string, kNumFusionFeatures> names = {
      "s", "s_tilde", "s_missing", "pair_distance", "kind_is_rel"};
  return names;
}

double compress_score(double s) {
  return std::copysign(std::log1p(std::abs(s) / kScoreScale), s);
}

Standardizer fit_standardizer(std::span<const std::optional<double>> scores) {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  for (const auto &s : scores) {
    if (!s) continue;
    const double x = compress_score(*s);
    sum += x;
    sum_sq += x * x;
    ++n;
  }
  Standardizer st;
  if (n == 0) return st;
  st.mean = sum / static_cast<double>(n);
  const double var = sum_sq / static_cast<double>(n) - st.mean * st.mean;
  st.stddev = var > 1e-12 ? std::sqrt(var) : 1.0;
  return st;
}

Eigen::VectorXd FusionFeatures::vector() const {
  Eigen::VectorXd x(kNumFusionFeatures);
  x << s, s_tilde, s_missing, pair_distance, kind_is_rel;
  return x;
}

FusionFeatures fuse_features(const ExtractionCandidate &candidate,
                             const std::optional<ConsistencyScore> &score,
                             const NetworkScore &net,
                             const Standardizer &standardizer,
                             int max_pair_distance) {
  FusionFeatures f;
  if (score) {
    f.s = standardizer.apply(compress_score(score->s));
  } else {
    f.s_missing = 1.0;
  }
  f.s_tilde = net.s_tilde;
  f.pair_distance = static_cast<double>(span_gap(candidate.symbol_span, candidate.value_span)) /
                    static_cast<double>(std::max(1, max_pair_distance));
  f.kind_is_rel = candidate.kind == RelationKind::kTickRel ? 1.0 : 0.0;
  return f;
}

void FusionParams::validate() const {
  if (weights.size() != kNumFusionFeatures) {
    throw DimensionMismatch("fusion weights have " + std::to_string(weights.size()) +
                            " entries, expected " + std::to_string(kNumFusionFeatures));
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw ConfigError("fusion threshold must be in (0, 1)");
  }
  if (!(standardizer.stddev > 0.0)) throw ConfigError("standardizer stddev must be > 0");
  if (!weights.allFinite() || !std::isfinite(bias)) {
    throw ConfigError("fusion parameters are not finite");
  }
}

FusionDecision classify(const FusionParams &params, const Eigen::VectorXd &features) {
  if (features.size() != params.weights.size()) {
    throw DimensionMismatch("fusion feature vector has " +
                            std::to_string(features.size()) + " entries");
  }
  FusionDecision d;
  d.probability = sigmoid(params.weights.dot(features) + params.bias);
  d.decision = d.probability > params.threshold ? Decision::kAccept : Decision::kReject;
  return d;
}

FusionDecision classify(const FusionParams &params, const FusionFeatures &features) {
  return classify(params, features.vector());
}

std::pair<Eigen::VectorXd, double> fusion_gradient(const FusionParams &params,
                                                   std::span<const FusionRow> rows) {
  Eigen::VectorXd gw = Eigen::VectorXd::Zero(params.weights.size());
  double gb = 0.0;
  for (const auto &row : rows) {
    const Eigen::VectorXd x = row.features.vector();
    const double p = sigmoid(params.weights.dot(x) + params.bias);
    gw += (p - row.label) * x;
    gb += p - row.label;
  }
  const double n = static_cast<double>(rows.size());
  return {gw / n, gb / n};
}

namespace {

double fusion_loss(const FusionParams &params, std::span<const FusionRow> rows) {
  double total = 0.0;
  for (const auto &row : rows) {
    total += bce_loss(sigmoid(params.weights.dot(row.features.vector()) + params.bias),
                      row.label);
  }
  return total / static_cast<double>(rows.size());
}

}  // namespace

FusionTrainResult train_fusion(std::span<const FusionRow> rows, double learning_rate,
                               int epochs, const FusionParams &initial) {
  if (rows.empty()) throw EmptyDataset("no rows to train the fusion classifier on");
  FusionTrainResult result;
  result.params = initial;
  result.params.weights = Eigen::VectorXd::Zero(kNumFusionFeatures);
  result.params.bias = 0.0;
  for (int e = 0; e < epochs; ++e) {
    const auto [gw, gb] = fusion_gradient(result.params, rows);
    result.params.weights -= learning_rate * gw;
    result.params.bias -= learning_rate * gb;
  }
  result.final_loss = fusion_loss(result.params, rows);
  return result;
}

void save_fusion_params(const FusionParams &params, const std::filesystem::path &path) {
  Json weights = Json::object();
  for (int k = 0; k < kNumFusionFeatures; ++k) {
    weights[fusion_feature_names()[k]] = params.weights(k);
  }
  const Json j = {{"feature_names", fusion_feature_names()},
                  {"weights", weights},
                  {"bias", params.bias},
                  {"threshold", params.threshold},
                  {"score_mean", params.standardizer.mean},
                  {"score_stddev", params.standardizer.stddev},
                  {"max_pair_distance", params.max_pair_distance}};
  write_file(path, j.dump(2) + "\n");
}

FusionParams load_fusion_params(const std::filesystem::path &path) {
  FusionParams p;
  try {
    const Json j = Json::parse(read_file(path));
    if (j.contains("feature_names") &&
        j.at("feature_names").get<std::vector<std::string>>() !=
            std::vector<std::string>(fusion_feature_names().begin(),
                                     fusion_feature_names().end())) {
      throw IoError(path.string() + ": unexpected fusion feature order");
    }
    for (int k = 0; k < kNumFusionFeatures; ++k) {
      p.weights(k) = j.at("weights").at(fusion_feature_names()[k]).get<double>();
    }
    p.bias = j.at("bias").get<double>();
    p.threshold = j.at("threshold").get<double>();
    p.standardizer.mean = j.at("score_mean").get<double>();
    p.standardizer.stddev = j.at("score_stddev").get<double>();
    p.max_pair_distance = j.at("max_pair_distance").get<int>();
  } catch (const Json::exception &e) {
    throw IoError(path.string() + ": " + e.what());
  }
  p.validate();
  return p;
}

}  // namespace tickx
