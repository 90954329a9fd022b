#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "pedtwin/encoder_decoder.hpp"

namespace gradcheck {

using pedtwin::nn::Matrix;

/// Hidden sizes 4/4/3, 4 steps of 8 features in, 8 steps out.
inline pedtwin::nn::Seq2SeqShape tiny_shape() { return {8, 4, 8, 4, 4, 3}; }

inline std::vector<Matrix<double>> random_inputs(const pedtwin::nn::Seq2SeqShape& s, int batch, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Matrix<double>> xs;
  for (int t = 0; t < s.input_steps; ++t) {
    Matrix<double> x(s.features, batch);
    for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = u(rng);
    xs.push_back(x);
  }
  return xs;
}

inline double loss_of(const pedtwin::nn::Seq2SeqWeights<double>& w, const pedtwin::nn::Seq2SeqShape& s,
                      const std::vector<Matrix<double>>& xs, const Matrix<double>& target) {
  return pedtwin::nn::mae_loss(pedtwin::nn::seq2seq_forward(w, s, xs), target);
}

struct Result {
  double worst = 0.0;  ///< largest relative error
  int checked = 0;
  int parameters = 0;
  bool heads_clear = false;  ///< no output sits on the ReLU kink
};

/// Every analytic gradient against a central difference with step h.
inline Result run(std::uint64_t seed = 11, double h = 1e-5) {
  namespace nn = pedtwin::nn;
  const auto s = tiny_shape();
  // Weights uniform in [-1, 1] keep every gradient well above the
  // finite-difference noise floor.
  auto w = nn::Seq2SeqWeights<double>::zeros(s);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  nn::for_each_tensor([&](auto& t) { for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = u(rng); }, w);
  w.head_b(0) = 0.3;
  const auto xs = random_inputs(s, 3, seed + 1);
  nn::Seq2SeqCache<double> cache;
  const auto pred = nn::seq2seq_forward(w, s, xs, &cache);
  Result r;
  r.heads_clear = (cache.head_pre.array().abs() > 1e-3).all();
  // Targets 0.05 off the outputs in alternating directions: every error keeps
  // its sign under the probe, and the small loss keeps roundoff low.
  Matrix<double> target = pred;
  for (Eigen::Index i = 0; i < target.size(); ++i) target.data()[i] += (i % 2 == 0) ? 0.05 : -0.05;
  Matrix<double> d_pred;
  nn::mae_loss(pred, target, &d_pred);
  const auto grad = nn::seq2seq_backward(w, s, cache, d_pred);

  auto probe = w;
  nn::for_each_tensor(
      [&](auto& p, const auto& g) {
        for (Eigen::Index i = 0; i < p.size(); ++i) {
          const double keep = p.data()[i];
          p.data()[i] = keep + h;
          const double up = loss_of(probe, s, xs, target);
          p.data()[i] = keep - h;
          const double down = loss_of(probe, s, xs, target);
          p.data()[i] = keep;
          const double numeric = (up - down) / (2 * h);
          const double analytic = g.data()[i];
          const double scale = std::max({std::abs(numeric), std::abs(analytic), 1e-8});
          r.worst = std::max(r.worst, std::abs(numeric - analytic) / scale);
          ++r.checked;
        }
      },
      probe, grad);
  r.parameters = static_cast<int>(nn::parameter_count(w));
  return r;
}

}  // namespace gradcheck
