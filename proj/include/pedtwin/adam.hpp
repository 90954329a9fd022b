#pragma once

#include <cmath>
#include <cstdint>

#include "pedtwin/encoder_decoder.hpp"

namespace pedtwin::nn {

struct AdamOptions {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// First/second moment estimates, shaped like the parameters.
template <typename Params>
struct AdamState {
  Params m;
  Params v;
  std::int64_t step = 0;
};

template <typename Scalar>
AdamState<Seq2SeqWeights<Scalar>> make_adam_state(const Seq2SeqShape& s) {
  return {Seq2SeqWeights<Scalar>::zeros(s), Seq2SeqWeights<Scalar>::zeros(s), 0};
}

/// Single Adam update on one tensor (Eigen dense object) with bias-corrected
/// moments. `step` is the 1-based update count.
template <typename P, typename G, typename M, typename V>
void adam_update(P& param, const G& grad, M& m, V& v, std::int64_t step, const AdamOptions& opt) {
  using Scalar = typename P::Scalar;
  const Scalar b1 = Scalar(opt.beta1);
  const Scalar b2 = Scalar(opt.beta2);
  const Scalar c1 = Scalar(1.0 - std::pow(opt.beta1, static_cast<double>(step)));
  const Scalar c2 = Scalar(1.0 - std::pow(opt.beta2, static_cast<double>(step)));
  const Scalar lr = Scalar(opt.learning_rate);
  const Scalar eps = Scalar(opt.epsilon);
  m = b1 * m + (Scalar(1) - b1) * grad;
  v = b2 * v + (Scalar(1) - b2) * grad.cwiseProduct(grad);
  param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
}

/// Applies one Adam step to every tensor of `params`.
template <typename Params>
void adam_step(Params& params, const Params& grads, AdamState<Params>& state, const AdamOptions& opt = {}) {
  ++state.step;
  for_each_tensor([&](auto& p, const auto& g, auto& m, auto& v) { adam_update(p, g, m, v, state.step, opt); },
                  params, grads, state.m, state.v);
}

}  // namespace pedtwin::nn
