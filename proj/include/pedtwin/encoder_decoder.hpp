#pragma once

#include <random>
#include <vector>

#include <Eigen/Core>

#include "pedtwin/errors.hpp"
#include "pedtwin/lstm.hpp"

namespace pedtwin::nn {

/// Layer sizes of the encoder-decoder network.
struct Seq2SeqShape {
  int features = 8;
  int input_steps = 4;
  int output_steps = 8;
  int enc1_units = 128;
  int enc2_units = 128;
  int dec_units = 64;

  friend bool operator==(const Seq2SeqShape&, const Seq2SeqShape&) = default;
};

/// Two stacked encoder LSTMs, a repeat vector of the last encoder state, two
/// stacked decoder LSTMs and a time-distributed 1-unit dense head with ReLU.
template <typename Scalar>
struct Seq2SeqWeights {
  LstmParams<Scalar> enc1, enc2, dec1, dec2;
  Matrix<Scalar> head_w;  // 1 x dec_units
  Vector<Scalar> head_b;  // 1

  static Seq2SeqWeights zeros(const Seq2SeqShape& s) {
    return {LstmParams<Scalar>::zeros(s.features, s.enc1_units),
            LstmParams<Scalar>::zeros(s.enc1_units, s.enc2_units),
            LstmParams<Scalar>::zeros(s.enc2_units, s.dec_units),
            LstmParams<Scalar>::zeros(s.dec_units, s.dec_units),
            Matrix<Scalar>::Zero(1, s.dec_units),
            Vector<Scalar>::Zero(1)};
  }

  bool matches(const Seq2SeqShape& s) const {
    return enc1.consistent() && enc2.consistent() && dec1.consistent() && dec2.consistent() &&
           enc1.inputs() == s.features && enc1.units() == s.enc1_units && enc2.inputs() == s.enc1_units &&
           enc2.units() == s.enc2_units && dec1.inputs() == s.enc2_units && dec1.units() == s.dec_units &&
           dec2.inputs() == s.dec_units && dec2.units() == s.dec_units && head_w.rows() == 1 &&
           head_w.cols() == s.dec_units && head_b.size() == 1;
  }

  friend bool operator==(const Seq2SeqWeights&, const Seq2SeqWeights&) = default;
};

/// Calls f on the same tensor of every argument, in a fixed order.
template <typename F, typename... W>
void for_each_tensor(F&& f, W&... w) {
  f(w.enc1.w_input...);
  f(w.enc1.w_recurrent...);
  f(w.enc1.bias...);
  f(w.enc2.w_input...);
  f(w.enc2.w_recurrent...);
  f(w.enc2.bias...);
  f(w.dec1.w_input...);
  f(w.dec1.w_recurrent...);
  f(w.dec1.bias...);
  f(w.dec2.w_input...);
  f(w.dec2.w_recurrent...);
  f(w.dec2.bias...);
  f(w.head_w...);
  f(w.head_b...);
}

template <typename Scalar>
Eigen::Index parameter_count(const Seq2SeqWeights<Scalar>& w) {
  Eigen::Index n = 0;
  for_each_tensor([&n](const auto& t) { n += t.size(); }, w);
  return n;
}

/// Weights uniform in +-1/sqrt(fan_in). LSTM biases start at zero except the
/// forget gate at one; the head bias starts at the middle of the unit target
/// range so the ReLU begins in its active region.
template <typename Scalar>
Seq2SeqWeights<Scalar> init_weights(const Seq2SeqShape& s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  auto fill = [&](Matrix<Scalar>& m, Eigen::Index fan_in) {
    const double limit = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = Scalar(limit * unit(rng));
  };
  auto init_lstm = [&](LstmParams<Scalar>& p) {
    fill(p.w_input, p.inputs());
    fill(p.w_recurrent, p.units());
    p.bias.setZero();
    p.bias.segment(p.units(), p.units()).setOnes();
  };
  auto w = Seq2SeqWeights<Scalar>::zeros(s);
  init_lstm(w.enc1);
  init_lstm(w.enc2);
  init_lstm(w.dec1);
  init_lstm(w.dec2);
  fill(w.head_w, s.dec_units);
  w.head_b(0) = Scalar(0.5);
  return w;
}

template <typename Scalar>
struct Seq2SeqCache {
  std::vector<LstmStepCache<Scalar>> enc1, enc2, dec1, dec2;
  std::vector<Matrix<Scalar>> dec_out;  // top decoder output per step
  Matrix<Scalar> head_pre;              // output_steps x batch, before ReLU
};

/// Batched forward pass in normalized units. `inputs[t]` is features x batch;
/// returns output_steps x batch.
template <typename Scalar>
Matrix<Scalar> seq2seq_forward(const Seq2SeqWeights<Scalar>& w, const Seq2SeqShape& s,
                               const std::vector<Matrix<Scalar>>& inputs, Seq2SeqCache<Scalar>* cache = nullptr) {
  if (static_cast<int>(inputs.size()) != s.input_steps || inputs.empty()) {
    throw ShapeMismatch("encoder expects " + std::to_string(s.input_steps) + " steps, got " +
                        std::to_string(inputs.size()));
  }
  const Eigen::Index batch = inputs.front().cols();
  for (const auto& x : inputs) {
    if (x.rows() != s.features || x.cols() != batch) throw ShapeMismatch("encoder input has wrong shape");
  }

  auto enc1_out = lstm_forward(w.enc1, inputs, cache ? &cache->enc1 : nullptr);
  auto enc2_out = lstm_forward(w.enc2, enc1_out, cache ? &cache->enc2 : nullptr);
  const std::vector<Matrix<Scalar>> repeated(static_cast<std::size_t>(s.output_steps), enc2_out.back());
  auto dec1_out = lstm_forward(w.dec1, repeated, cache ? &cache->dec1 : nullptr);
  auto dec2_out = lstm_forward(w.dec2, dec1_out, cache ? &cache->dec2 : nullptr);

  Matrix<Scalar> pre(s.output_steps, batch);
  for (int k = 0; k < s.output_steps; ++k) {
    pre.row(k).noalias() = w.head_w * dec2_out[static_cast<std::size_t>(k)];
    pre.row(k).array() += w.head_b(0);
  }
  Matrix<Scalar> out = pre.cwiseMax(Scalar(0));
  if (cache != nullptr) {
    cache->dec_out = std::move(dec2_out);
    cache->head_pre = std::move(pre);
  }
  return out;
}

/// Gradients of a loss with respect to every weight, given dLoss/dOutput
/// (output_steps x batch) and the cache of the matching forward pass.
template <typename Scalar>
Seq2SeqWeights<Scalar> seq2seq_backward(const Seq2SeqWeights<Scalar>& w, const Seq2SeqShape& s,
                                        const Seq2SeqCache<Scalar>& cache, const Matrix<Scalar>& d_output) {
  auto grad = Seq2SeqWeights<Scalar>::zeros(s);
  const Eigen::Index batch = d_output.cols();

  // ReLU derivative taken as 0 at the kink.
  const Matrix<Scalar> d_pre =
      d_output.cwiseProduct(cache.head_pre.unaryExpr([](Scalar v) { return v > Scalar(0) ? Scalar(1) : Scalar(0); }));

  std::vector<Matrix<Scalar>> d_dec2(static_cast<std::size_t>(s.output_steps));
  for (int k = 0; k < s.output_steps; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    grad.head_w.noalias() += d_pre.row(k) * cache.dec_out[kk].transpose();
    grad.head_b(0) += d_pre.row(k).sum();
    d_dec2[kk].noalias() = w.head_w.transpose() * d_pre.row(k);
  }
  const auto d_dec1 = lstm_backward(w.dec2, cache.dec2, d_dec2, grad.dec2);
  const auto d_repeat = lstm_backward(w.dec1, cache.dec1, d_dec1, grad.dec1);

  std::vector<Matrix<Scalar>> d_enc2(static_cast<std::size_t>(s.input_steps),
                                     Matrix<Scalar>::Zero(s.enc2_units, batch));
  for (const auto& d : d_repeat) d_enc2.back() += d;
  const auto d_enc1 = lstm_backward(w.enc2, cache.enc2, d_enc2, grad.enc2);
  lstm_backward(w.enc1, cache.enc1, d_enc1, grad.enc1);
  return grad;
}

/// Mean absolute error over every entry, and its gradient with the
/// subgradient at zero error taken as 0.
template <typename Scalar>
Scalar mae_loss(const Matrix<Scalar>& pred, const Matrix<Scalar>& target, Matrix<Scalar>* d_pred = nullptr) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) throw ShapeMismatch("loss shape mismatch");
  const Matrix<Scalar> diff = pred - target;
  const Scalar n = Scalar(static_cast<double>(diff.size()));
  if (d_pred != nullptr) {
    *d_pred = diff.unaryExpr([n](Scalar v) {
      return v > Scalar(0) ? Scalar(1) / n : (v < Scalar(0) ? Scalar(-1) / n : Scalar(0));
    });
  }
  return diff.cwiseAbs().sum() / n;
}

}  // namespace pedtwin::nn
