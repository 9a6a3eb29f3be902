#ifndef TICKX_TRAINER_H_
#define TICKX_TRAINER_H_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "tickx/encoder.h"
#include "tickx/errors.h"
#include "tickx/network.h"

namespace tickx {

struct TrainConfig {
  double learning_rate = 1e-3;
  int batch_size = 32;
  int epochs = 10;
  std::uint64_t seed = 42;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  double grad_clip = 5.0;  // global L2 norm; <= 0 disables clipping
  double validation_fraction = 0.1;
  double init_scale = 0.08;
  // Called after every epoch with (epoch, train loss, validation loss).
  std::function<void(int, double, double)> on_epoch;

  void validate() const;
};

// Per-epoch mean BCE. Entry 0 is measured before any update.
struct TrainHistory {
  std::vector<double> train_loss;
  std::vector<double> validation_loss;  // empty without a validation split
};

// A dense sequence example; EncodedCandidate is the compact equivalent used
// for corpus-scale training.
struct SequenceExample {
  Eigen::MatrixXd features;  // D x T
  Eigen::VectorXd global;
  std::optional<int> label;
};

inline const Eigen::MatrixXd &example_features(const SequenceExample &e) {
  return e.features;
}
inline Eigen::SparseMatrix<double> example_features(const EncodedCandidate &e) {
  return e.sequence.sparse_features();
}

struct VectorExample {
  Eigen::VectorXd input;
  std::optional<int> label;
};

// The character LSTM network as a trainable model.
struct CharLstmModel {
  using Params = NetworkParams<double>;

  template <typename Example>
  static double predict(const Params &params, const Example &example) {
    return network_trace(params, example_features(example), example.global)
        .y_tilde;
  }

  // Adds scale * d(BCE)/d(params) to grad and returns the example's loss.
  template <typename Example>
  static double accumulate_gradient(const Params &params,
                                    const Example &example, int label,
                                    double scale, Params &grad) {
    decltype(auto) x = example_features(example);
    const auto trace = network_trace(params, x, example.global);
    network_backward(params, x, example.global, trace,
                     scale * (trace.y_tilde - label), grad);
    return bce_loss(trace.y_tilde, label);
  }
};

// The two-layer fully connected n-gram baseline as a trainable model.
struct NgramModel {
  using Params = NgramParams<double>;

  static double predict(const Params &params, const VectorExample &example) {
    return ngram_trace(params, example.input).y_tilde;
  }

  static double accumulate_gradient(const Params &params,
                                    const VectorExample &example, int label,
                                    double scale, Params &grad) {
    const auto trace = ngram_trace(params, example.input);
    ngram_backward(params, example.input, trace,
                   scale * (trace.y_tilde - label), grad);
    return bce_loss(trace.y_tilde, label);
  }
};

// Gradient of the mean batch BCE with respect to every parameter. The
// derivative used at the head is y_tilde - y, the exact derivative of the
// unclamped loss.
template <typename Model, typename Example>
typename Model::Params batch_gradient(const typename Model::Params &params,
                                      std::span<const Example> batch,
                                      double *mean_loss = nullptr) {
  auto grad = zeros_like(params);
  double loss = 0.0;
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (const auto &example : batch) {
    if (!example.label) throw EmptyDataset("training example has no label");
    loss += Model::accumulate_gradient(params, example, *example.label, scale,
                                       grad);
  }
  if (mean_loss) *mean_loss = loss * scale;
  return grad;
}

template <typename Model, typename Example>
double mean_loss(const typename Model::Params &params,
                 std::span<const Example> examples,
                 std::span<const std::size_t> indices) {
  double total = 0.0;
  for (std::size_t i : indices) {
    total += bce_loss(Model::predict(params, examples[i]), *examples[i].label);
  }
  return indices.empty() ? 0.0 : total / static_cast<double>(indices.size());
}

template <typename Params>
class AdamOptimizer {
 public:
  AdamOptimizer(const Params &params, const TrainConfig &config)
      : config_(config), m_(zeros_like(params)), v_(zeros_like(params)) {}

  void step(Params &params, Params &grad) {
    if (config_.grad_clip > 0.0) {
      const double norm = std::sqrt(squared_norm(grad));
      if (norm > config_.grad_clip) {
        const double factor = config_.grad_clip / norm;
        zip_tensors([&](auto &g) { g *= factor; }, grad);
      }
    }
    ++t_;
    const double b1 = config_.beta1, b2 = config_.beta2;
    const double lr = config_.learning_rate *
                      std::sqrt(1.0 - std::pow(b2, t_)) /
                      (1.0 - std::pow(b1, t_));
    const double eps = config_.adam_epsilon;
    zip_tensors(
        [&](auto &p, auto &g, auto &m, auto &v) {
          m = b1 * m + (1.0 - b1) * g;
          v.array() = b2 * v.array() + (1.0 - b2) * g.array().square();
          p.array() -= lr * m.array() / (v.array().sqrt() + eps);
        },
        params, grad, m_, v_);
  }

 private:
  TrainConfig config_;
  Params m_;
  Params v_;
  long t_ = 0;
};

// Minibatch Adam on mean BCE with global-norm clipping. A seeded shuffle
// fixes the validation split once; each epoch then reshuffles the training
// indices. Single-threaded and bit-for-bit reproducible for a given seed.
template <typename Model, typename Example>
TrainHistory train(typename Model::Params &params,
                   std::span<const Example> dataset,
                   const TrainConfig &config) {
  config.validate();
  if (dataset.empty()) throw EmptyDataset("training set is empty");
  for (const auto &example : dataset) {
    if (!example.label) throw EmptyDataset("training example has no label");
  }

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::size_t num_val = static_cast<std::size_t>(
      std::floor(config.validation_fraction * dataset.size()));
  if (num_val >= dataset.size()) num_val = dataset.size() - 1;
  std::vector<std::size_t> val(order.end() - num_val, order.end());
  std::vector<std::size_t> trn(order.begin(), order.end() - num_val);
  std::sort(val.begin(), val.end());
  std::sort(trn.begin(), trn.end());

  TrainHistory history;
  auto record = [&](int epoch, double train_loss) {
    history.train_loss.push_back(train_loss);
    double val_loss = 0.0;
    if (!val.empty()) {
      val_loss = mean_loss<Model, Example>(params, dataset, val);
      history.validation_loss.push_back(val_loss);
    }
    if (config.on_epoch) config.on_epoch(epoch, train_loss, val_loss);
  };
  record(0, mean_loss<Model, Example>(params, dataset, trn));

  AdamOptimizer<typename Model::Params> adam(params, config);
  std::vector<double> losses(dataset.size(), 0.0);
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::vector<std::size_t> epoch_order = trn;
    std::shuffle(epoch_order.begin(), epoch_order.end(), rng);
    for (std::size_t start = 0; start < epoch_order.size();
         start += config.batch_size) {
      const std::size_t stop = std::min(
          epoch_order.size(), start + static_cast<std::size_t>(config.batch_size));
      auto grad = zeros_like(params);
      const double scale = 1.0 / static_cast<double>(stop - start);
      for (std::size_t k = start; k < stop; ++k) {
        const std::size_t i = epoch_order[k];
        losses[i] = Model::accumulate_gradient(params, dataset[i],
                                               *dataset[i].label, scale, grad);
      }
      adam.step(params, grad);
    }
    // Summed in index order so the value does not depend on the shuffle.
    double total = 0.0;
    for (std::size_t i : trn) total += losses[i];
    record(epoch, total / static_cast<double>(trn.size()));
  }
  return history;
}

}  // namespace tickx

#endif  // TICKX_TRAINER_H_
