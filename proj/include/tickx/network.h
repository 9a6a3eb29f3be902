#ifndef TICKX_NETWORK_H_
#define TICKX_NETWORK_H_

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <type_traits>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "tickx/errors.h"

namespace tickx {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

enum class Activation : std::uint8_t { kRelu = 0, kSigmoid = 1, kIdentity = 2 };

inline constexpr double kPredictionClamp = 1e-7;

template <typename Derived>
auto sigmoid(const Eigen::ArrayBase<Derived> &x) {
  using Scalar = typename Derived::Scalar;
  return Scalar(1) / (Scalar(1) + (-x).exp());
}

template <std::floating_point Scalar>
Scalar sigmoid(Scalar x) {
  return Scalar(1) / (Scalar(1) + std::exp(-x));
}

template <typename Scalar>
Scalar clamp_probability(Scalar p) {
  const Scalar lo(kPredictionClamp);
  return std::clamp(p, lo, Scalar(1) - lo);
}

// ln(p / (1 - p)) of the clamped probability.
template <typename Scalar>
Scalar logit(Scalar p) {
  p = clamp_probability(p);
  return std::log(p / (Scalar(1) - p));
}

// Binary cross-entropy of a clamped prediction.
template <typename Scalar>
Scalar bce_loss(Scalar y_tilde, int y) {
  const Scalar p = clamp_probability(y_tilde);
  return y == 1 ? -std::log(p) : -std::log(Scalar(1) - p);
}

// Single-layer unidirectional LSTM with forget gate and no peepholes.
// Rows of `weights` and `bias` are packed in gate order
// (input, forget, output, cell candidate); columns of `weights` are the
// input features followed by the previous hidden state.
template <typename Scalar>
struct LstmParams {
  MatrixX<Scalar> weights;  // 4H x (D + H)
  VectorX<Scalar> bias;     // 4H

  static LstmParams zeros(int input_size, int hidden_size) {
    return {MatrixX<Scalar>::Zero(4 * hidden_size, input_size + hidden_size),
            VectorX<Scalar>::Zero(4 * hidden_size)};
  }
  int hidden_size() const { return static_cast<int>(bias.size() / 4); }
  int input_size() const {
    return static_cast<int>(weights.cols()) - hidden_size();
  }
  template <typename F, typename... Ps>
  static void zip(F &&f, Ps &...ps) {
    f(ps.weights...);
    f(ps.bias...);
  }
};

template <typename Scalar>
struct FcParams {
  MatrixX<Scalar> weights;  // out x in
  VectorX<Scalar> bias;     // out
  Activation activation = Activation::kIdentity;

  static FcParams zeros(int in, int out, Activation act) {
    return {MatrixX<Scalar>::Zero(out, in), VectorX<Scalar>::Zero(out), act};
  }
  int in_size() const { return static_cast<int>(weights.cols()); }
  int out_size() const { return static_cast<int>(weights.rows()); }
  template <typename F, typename... Ps>
  static void zip(F &&f, Ps &...ps) {
    f(ps.weights...);
    f(ps.bias...);
  }
};

template <typename Scalar>
VectorX<Scalar> activate(Activation act, const VectorX<Scalar> &pre) {
  switch (act) {
    case Activation::kRelu:
      return pre.cwiseMax(Scalar(0));
    case Activation::kSigmoid:
      return sigmoid(pre.array()).matrix();
    case Activation::kIdentity:
      break;
  }
  return pre;
}

// d(out)/d(pre) applied elementwise to an upstream gradient.
template <typename Scalar>
VectorX<Scalar> activation_backward(Activation act, const VectorX<Scalar> &pre,
                                    const VectorX<Scalar> &out,
                                    const VectorX<Scalar> &d_out) {
  switch (act) {
    case Activation::kRelu:
      return (pre.array() > Scalar(0)).select(d_out, Scalar(0));
    case Activation::kSigmoid:
      return (d_out.array() * out.array() * (Scalar(1) - out.array())).matrix();
    case Activation::kIdentity:
      break;
  }
  return d_out;
}

// Per-step activations kept for the backward pass. Column t of `gates` holds
// post-nonlinearity (i, f, o, g) for step t; `cells` and `hidden` carry the
// zero initial state in column 0.
template <typename Scalar>
struct LstmCache {
  MatrixX<Scalar> gates;   // 4H x T
  MatrixX<Scalar> cells;   // H x (T + 1)
  MatrixX<Scalar> hidden;  // H x (T + 1)

  auto final_hidden() const { return hidden.col(hidden.cols() - 1); }
};

// `inputs` is D x T, dense or sparse; one-hot character features are mostly
// zeros, so the sparse form skips most of the input projection.
template <typename Scalar, typename Inputs>
LstmCache<Scalar> lstm_forward(const LstmParams<Scalar> &params,
                               const Inputs &inputs) {
  const Eigen::Index hidden = params.hidden_size();
  const Eigen::Index steps = inputs.cols();
  if (inputs.rows() != params.input_size()) {
    throw DimensionMismatch("lstm input has " + std::to_string(inputs.rows()) +
                            " rows, expected " +
                            std::to_string(params.input_size()));
  }
  if (steps < 1) throw DimensionMismatch("lstm input sequence is empty");

  LstmCache<Scalar> cache;
  cache.gates.resize(4 * hidden, steps);
  cache.cells = MatrixX<Scalar>::Zero(hidden, steps + 1);
  cache.hidden = MatrixX<Scalar>::Zero(hidden, steps + 1);

  // Input projections for all steps at once; only the recurrent product
  // remains inside the loop.
  MatrixX<Scalar> pre = params.weights.leftCols(params.input_size()) * inputs;
  pre.colwise() += params.bias;
  const auto recurrent = params.weights.rightCols(hidden);

  VectorX<Scalar> z(4 * hidden);
  for (Eigen::Index t = 0; t < steps; ++t) {
    z = pre.col(t);
    z.noalias() += recurrent * cache.hidden.col(t);
    auto gate = cache.gates.col(t);
    gate.head(3 * hidden) = sigmoid(z.head(3 * hidden).array()).matrix();
    gate.tail(hidden) = z.tail(hidden).array().tanh().matrix();
    const auto in = gate.segment(0, hidden).array();
    const auto forget = gate.segment(hidden, hidden).array();
    const auto out = gate.segment(2 * hidden, hidden).array();
    const auto cand = gate.segment(3 * hidden, hidden).array();
    cache.cells.col(t + 1) =
        (forget * cache.cells.col(t).array() + in * cand).matrix();
    cache.hidden.col(t + 1) =
        (out * cache.cells.col(t + 1).array().tanh()).matrix();
  }
  return cache;
}

// Backpropagation through time from a gradient on the final hidden state.
// Accumulates into `grad`.
template <typename Scalar, typename Inputs>
void lstm_backward(const LstmParams<Scalar> &params, const Inputs &inputs,
                   const LstmCache<Scalar> &cache,
                   const VectorX<Scalar> &d_final_hidden,
                   LstmParams<Scalar> &grad) {
  const Eigen::Index hidden = params.hidden_size();
  const Eigen::Index steps = inputs.cols();
  const auto recurrent = params.weights.rightCols(hidden);

  MatrixX<Scalar> dz(4 * hidden, steps);
  VectorX<Scalar> dh = d_final_hidden;
  VectorX<Scalar> dc = VectorX<Scalar>::Zero(hidden);
  for (Eigen::Index t = steps - 1; t >= 0; --t) {
    const auto gate = cache.gates.col(t);
    const auto in = gate.segment(0, hidden).array();
    const auto forget = gate.segment(hidden, hidden).array();
    const auto out = gate.segment(2 * hidden, hidden).array();
    const auto cand = gate.segment(3 * hidden, hidden).array();
    const Eigen::Array<Scalar, Eigen::Dynamic, 1> tanh_c =
        cache.cells.col(t + 1).array().tanh();

    dc.array() += dh.array() * out * (Scalar(1) - tanh_c.square());
    auto d = dz.col(t);
    d.segment(0, hidden) =
        (dc.array() * cand * in * (Scalar(1) - in)).matrix();
    d.segment(hidden, hidden) = (dc.array() * cache.cells.col(t).array() *
                                 forget * (Scalar(1) - forget))
                                    .matrix();
    d.segment(2 * hidden, hidden) =
        (dh.array() * tanh_c * out * (Scalar(1) - out)).matrix();
    d.segment(3 * hidden, hidden) =
        (dc.array() * in * (Scalar(1) - cand.square())).matrix();

    dh.noalias() = recurrent.transpose() * d;
    dc.array() *= forget;
  }
  grad.weights.leftCols(params.input_size()).noalias() +=
      dz * inputs.transpose();
  grad.weights.rightCols(hidden).noalias() +=
      dz * cache.hidden.leftCols(steps).transpose();
  grad.bias += dz.rowwise().sum();
}

// Character LSTM over the section, a RELU layer over the global features and
// a sigmoid head over their concatenation.
template <typename Scalar>
struct NetworkParams {
  LstmParams<Scalar> lstm;
  FcParams<Scalar> fc_global;  // G -> K, RELU
  FcParams<Scalar> head;       // (H + K) -> 1, SIGMOID

  static NetworkParams zeros(int input_size, int hidden_size, int global_dim,
                             int global_hidden) {
    return {LstmParams<Scalar>::zeros(input_size, hidden_size),
            FcParams<Scalar>::zeros(global_dim, global_hidden,
                                    Activation::kRelu),
            FcParams<Scalar>::zeros(hidden_size + global_hidden, 1,
                                    Activation::kSigmoid)};
  }
  int input_size() const { return lstm.input_size(); }
  int hidden_size() const { return lstm.hidden_size(); }
  int global_dim() const { return fc_global.in_size(); }
  int global_hidden() const { return fc_global.out_size(); }

  template <typename F, typename... Ps>
  static void zip(F &&f, Ps &...ps) {
    LstmParams<Scalar>::zip(f, ps.lstm...);
    FcParams<Scalar>::zip(f, ps.fc_global...);
    FcParams<Scalar>::zip(f, ps.head...);
  }
};

struct NetworkScore {
  double y_tilde = 0.5;
  double s_tilde = 0.0;
};

template <typename Scalar>
NetworkScore make_score(Scalar y_tilde) {
  const double p = clamp_probability(static_cast<double>(y_tilde));
  return {p, logit(p)};
}

template <typename Scalar>
struct NetworkTrace {
  LstmCache<Scalar> lstm;
  VectorX<Scalar> global_pre;
  VectorX<Scalar> global_out;
  VectorX<Scalar> head_in;
  Scalar y_tilde = Scalar(0.5);  // unclamped sigmoid output
};

template <typename Scalar, typename Inputs>
NetworkTrace<Scalar> network_trace(const NetworkParams<Scalar> &params,
                                   const Inputs &inputs,
                                   const VectorX<Scalar> &global) {
  if (global.size() != params.global_dim()) {
    throw DimensionMismatch("global feature dimension " +
                            std::to_string(global.size()) + ", expected " +
                            std::to_string(params.global_dim()));
  }
  NetworkTrace<Scalar> trace;
  trace.lstm = lstm_forward(params.lstm, inputs);
  trace.global_pre = params.fc_global.weights * global + params.fc_global.bias;
  trace.global_out = activate(params.fc_global.activation, trace.global_pre);
  trace.head_in.resize(params.hidden_size() + params.global_hidden());
  trace.head_in << trace.lstm.final_hidden(), trace.global_out;
  const Scalar z = params.head.weights.row(0).dot(trace.head_in) +
                   params.head.bias(0);
  trace.y_tilde = sigmoid(z);
  return trace;
}

template <typename Scalar, typename Inputs>
NetworkScore network_forward(const NetworkParams<Scalar> &params,
                             const Inputs &inputs,
                             const VectorX<Scalar> &global) {
  return make_score(network_trace(params, inputs, global).y_tilde);
}

// Backward pass from d(loss)/d(head logit).
template <typename Scalar, typename Inputs>
void network_backward(const NetworkParams<Scalar> &params,
                      const Inputs &inputs,
                      const VectorX<Scalar> &global,
                      const NetworkTrace<Scalar> &trace, Scalar d_logit,
                      NetworkParams<Scalar> &grad) {
  const int hidden = params.hidden_size();
  grad.head.weights.row(0) += d_logit * trace.head_in.transpose();
  grad.head.bias(0) += d_logit;
  const VectorX<Scalar> d_head_in = d_logit * params.head.weights.row(0).transpose();

  const VectorX<Scalar> d_global_out = d_head_in.tail(params.global_hidden());
  const VectorX<Scalar> d_global_pre =
      activation_backward(params.fc_global.activation, trace.global_pre,
                          trace.global_out, d_global_out);
  grad.fc_global.weights.noalias() += d_global_pre * global.transpose();
  grad.fc_global.bias += d_global_pre;

  lstm_backward(params.lstm, inputs, trace.lstm,
                VectorX<Scalar>(d_head_in.head(hidden)), grad.lstm);
}

// Two-layer fully connected n-gram baseline: RELU hidden layer, sigmoid head.
template <typename Scalar>
struct NgramParams {
  FcParams<Scalar> hidden;
  FcParams<Scalar> head;

  static NgramParams zeros(int input_dim, int hidden_dim) {
    return {FcParams<Scalar>::zeros(input_dim, hidden_dim, Activation::kRelu),
            FcParams<Scalar>::zeros(hidden_dim, 1, Activation::kSigmoid)};
  }
  int input_dim() const { return hidden.in_size(); }
  int hidden_dim() const { return hidden.out_size(); }

  template <typename F, typename... Ps>
  static void zip(F &&f, Ps &...ps) {
    FcParams<Scalar>::zip(f, ps.hidden...);
    FcParams<Scalar>::zip(f, ps.head...);
  }
};

template <typename Scalar>
struct NgramTrace {
  VectorX<Scalar> pre;
  VectorX<Scalar> out;
  Scalar y_tilde = Scalar(0.5);
};

template <typename Scalar>
NgramTrace<Scalar> ngram_trace(const NgramParams<Scalar> &params,
                               const VectorX<Scalar> &x) {
  if (x.size() != params.input_dim()) {
    throw DimensionMismatch("baseline input dimension " +
                            std::to_string(x.size()) + ", expected " +
                            std::to_string(params.input_dim()));
  }
  NgramTrace<Scalar> trace;
  trace.pre = params.hidden.weights * x + params.hidden.bias;
  trace.out = activate(params.hidden.activation, trace.pre);
  trace.y_tilde =
      sigmoid(params.head.weights.row(0).dot(trace.out) + params.head.bias(0));
  return trace;
}

template <typename Scalar>
NetworkScore baseline_forward(const NgramParams<Scalar> &params,
                              const VectorX<Scalar> &x) {
  return make_score(ngram_trace(params, x).y_tilde);
}

template <typename Scalar>
void ngram_backward(const NgramParams<Scalar> &params, const VectorX<Scalar> &x,
                    const NgramTrace<Scalar> &trace, Scalar d_logit,
                    NgramParams<Scalar> &grad) {
  grad.head.weights.row(0) += d_logit * trace.out.transpose();
  grad.head.bias(0) += d_logit;
  const VectorX<Scalar> d_out = d_logit * params.head.weights.row(0).transpose();
  const VectorX<Scalar> d_pre = activation_backward(
      params.hidden.activation, trace.pre, trace.out, d_out);
  grad.hidden.weights.noalias() += d_pre * x.transpose();
  grad.hidden.bias += d_pre;
}

// Applies f(tensor_a, tensor_b, ...) to every corresponding tensor pair of
// parameter structs sharing a layout.
template <typename Params, typename F, typename... Ps>
void zip_tensors(F &&f, Params &first, Ps &...rest) {
  std::remove_cv_t<Params>::zip(f, first, rest...);
}

template <typename Params>
Params zeros_like(const Params &params) {
  Params out = params;
  zip_tensors([](auto &t) { t.setZero(); }, out);
  return out;
}

template <typename Params>
double squared_norm(const Params &params) {
  double total = 0.0;
  zip_tensors([&](const auto &t) { total += static_cast<double>(t.squaredNorm()); },
              params);
  return total;
}

template <typename Params>
bool all_finite(const Params &params) {
  bool ok = true;
  zip_tensors([&](const auto &t) { ok = ok && t.allFinite(); }, params);
  return ok;
}

// Uniform(-scale, scale) weights, zero biases, LSTM forget-gate bias 1.
template <typename Scalar>
void initialize(NetworkParams<Scalar> &params, double scale,
                std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-scale, scale);
  auto fill = [&](auto &m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        m(i, j) = static_cast<Scalar>(uniform(rng));
  };
  fill(params.lstm.weights);
  fill(params.fc_global.weights);
  fill(params.head.weights);
  params.lstm.bias.setZero();
  params.lstm.bias.segment(params.hidden_size(), params.hidden_size())
      .setConstant(Scalar(1));
  params.fc_global.bias.setZero();
  params.head.bias.setZero();
}

template <typename Scalar>
void initialize(NgramParams<Scalar> &params, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(-scale, scale);
  auto fill = [&](auto &m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        m(i, j) = static_cast<Scalar>(uniform(rng));
  };
  fill(params.hidden.weights);
  fill(params.head.weights);
  params.hidden.bias.setZero();
  params.head.bias.setZero();
}

// Checkpoint: magic "TICKXNET", u32 format version, u32 model kind,
// u32 D, H, G, K, G', then every tensor row-major as float64.
inline constexpr std::uint32_t kCheckpointVersion = 1;
enum class ModelKind : std::uint32_t { kCharLstm = 0, kNgramBaseline = 1 };

void save_checkpoint(const NetworkParams<double> &params,
                     const std::filesystem::path &path);
NetworkParams<double> load_checkpoint(const std::filesystem::path &path);
void save_checkpoint(const NgramParams<double> &params,
                     const std::filesystem::path &path);
NgramParams<double> load_baseline_checkpoint(const std::filesystem::path &path);

}  // namespace tickx

#endif  // TICKX_NETWORK_H_
