#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "pedtwin/errors.hpp"

namespace pedtwin::nn {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Parameters of one LSTM layer with H units over D inputs. The four gate
/// blocks are stacked row-wise in the order input, forget, cell, output.
template <typename Scalar>
struct LstmParams {
  Matrix<Scalar> w_input;      // 4H x D
  Matrix<Scalar> w_recurrent;  // 4H x H
  Vector<Scalar> bias;         // 4H

  Eigen::Index units() const { return w_recurrent.cols(); }
  Eigen::Index inputs() const { return w_input.cols(); }

  static LstmParams zeros(Eigen::Index inputs, Eigen::Index units) {
    return {Matrix<Scalar>::Zero(4 * units, inputs), Matrix<Scalar>::Zero(4 * units, units),
            Vector<Scalar>::Zero(4 * units)};
  }

  bool consistent() const {
    const auto h = units();
    return h > 0 && w_recurrent.rows() == 4 * h && w_input.rows() == 4 * h && bias.size() == 4 * h;
  }

  friend bool operator==(const LstmParams& a, const LstmParams& b) {
    return a.w_input == b.w_input && a.w_recurrent == b.w_recurrent && a.bias == b.bias;
  }
};

template <typename Scalar>
Scalar sigmoid(Scalar x) {
  using std::exp;
  return Scalar(1) / (Scalar(1) + exp(-x));
}

/// Per-step values kept for backpropagation. Every matrix has one column per
/// batch entry.
template <typename Scalar>
struct LstmStepCache {
  Matrix<Scalar> x, h_prev, c_prev;
  Matrix<Scalar> gates;  // activated i, f, g, o stacked as in LstmParams
  Matrix<Scalar> c, tanh_c;
};

template <typename Derived>
auto sigmoid_array(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return (Scalar(1) + (-x).exp()).inverse();
}

/// tanh(x) = 2 sigmoid(2x) - 1, so both activations share the vectorized exp.
template <typename Derived>
auto tanh_array(const Eigen::ArrayBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return Scalar(2) * sigmoid_array(Scalar(2) * x) - Scalar(1);
}

/// Gate pre-activations into activated gates, in place.
template <typename Scalar>
void activate_gates(Matrix<Scalar>& z, Eigen::Index units) {
  const Eigen::Index h = units;
  z.topRows(2 * h).array() = sigmoid_array(z.topRows(2 * h).array()).eval();
  z.middleRows(2 * h, h).array() = tanh_array(z.middleRows(2 * h, h).array()).eval();
  z.bottomRows(h).array() = sigmoid_array(z.bottomRows(h).array()).eval();
}

/// One LSTM step over a batch (columns):
///   i, f, o = sigmoid(.), g = tanh(.), c = f*c_prev + i*g, h = o*tanh(c)
template <typename Scalar>
std::pair<Matrix<Scalar>, Matrix<Scalar>> lstm_cell_step(const LstmParams<Scalar>& p, const Matrix<Scalar>& x,
                                                         const Matrix<Scalar>& h_prev, const Matrix<Scalar>& c_prev,
                                                         LstmStepCache<Scalar>* cache = nullptr) {
  const Eigen::Index h = p.units();
  if (x.rows() != p.inputs() || h_prev.rows() != h || c_prev.rows() != h || x.cols() != h_prev.cols() ||
      x.cols() != c_prev.cols()) {
    throw ShapeMismatch("lstm_cell_step: inconsistent shapes");
  }
  Matrix<Scalar> z(4 * h, x.cols());
  z.noalias() = p.w_input * x;
  z.noalias() += p.w_recurrent * h_prev;
  z.colwise() += p.bias;
  activate_gates(z, h);

  Matrix<Scalar> c = z.middleRows(h, h).cwiseProduct(c_prev) + z.topRows(h).cwiseProduct(z.middleRows(2 * h, h));
  Matrix<Scalar> tanh_c = tanh_array(c.array()).matrix();
  Matrix<Scalar> h_out = z.bottomRows(h).cwiseProduct(tanh_c);
  if (cache != nullptr) {
    cache->x = x;
    cache->h_prev = h_prev;
    cache->c_prev = c_prev;
    cache->gates = std::move(z);
    cache->c = c;
    cache->tanh_c = std::move(tanh_c);
  }
  return {std::move(h_out), std::move(c)};
}

/// Runs the layer over a sequence from a zero state. Returns the hidden
/// output of every step.
template <typename Scalar>
std::vector<Matrix<Scalar>> lstm_forward(const LstmParams<Scalar>& p, const std::vector<Matrix<Scalar>>& inputs,
                                         std::vector<LstmStepCache<Scalar>>* cache = nullptr) {
  std::vector<Matrix<Scalar>> outputs;
  outputs.reserve(inputs.size());
  if (inputs.empty()) return outputs;
  const Eigen::Index batch = inputs.front().cols();
  Matrix<Scalar> h = Matrix<Scalar>::Zero(p.units(), batch);
  Matrix<Scalar> c = Matrix<Scalar>::Zero(p.units(), batch);
  if (cache != nullptr) cache->resize(inputs.size());
  for (std::size_t t = 0; t < inputs.size(); ++t) {
    auto [h_next, c_next] = lstm_cell_step(p, inputs[t], h, c, cache != nullptr ? &(*cache)[t] : nullptr);
    h = std::move(h_next);
    c = std::move(c_next);
    outputs.push_back(h);
  }
  return outputs;
}

/// Backpropagation through time. `d_outputs[t]` is dLoss/dh_t coming from
/// above; parameter gradients are accumulated into `grad`. Returns dLoss/dx_t.
template <typename Scalar>
std::vector<Matrix<Scalar>> lstm_backward(const LstmParams<Scalar>& p, const std::vector<LstmStepCache<Scalar>>& cache,
                                          const std::vector<Matrix<Scalar>>& d_outputs, LstmParams<Scalar>& grad) {
  const Eigen::Index h = p.units();
  const std::size_t steps = cache.size();
  std::vector<Matrix<Scalar>> d_inputs(steps);
  if (steps == 0) return d_inputs;
  const Eigen::Index batch = cache.front().x.cols();

  Matrix<Scalar> dh_next = Matrix<Scalar>::Zero(h, batch);
  Matrix<Scalar> dc_next = Matrix<Scalar>::Zero(h, batch);
  Matrix<Scalar> dz(4 * h, batch);
  for (std::size_t step = steps; step-- > 0;) {
    const auto& s = cache[step];
    const auto i = s.gates.topRows(h);
    const auto f = s.gates.middleRows(h, h);
    const auto g = s.gates.middleRows(2 * h, h);
    const auto o = s.gates.bottomRows(h);

    const Matrix<Scalar> dh = d_outputs[step] + dh_next;
    const Matrix<Scalar> dc =
        dc_next + dh.cwiseProduct(o).cwiseProduct((Scalar(1) - s.tanh_c.array().square()).matrix());

    dz.topRows(h) = dc.cwiseProduct(g).cwiseProduct(i.cwiseProduct((Scalar(1) - i.array()).matrix()));
    dz.middleRows(h, h) = dc.cwiseProduct(s.c_prev).cwiseProduct(f.cwiseProduct((Scalar(1) - f.array()).matrix()));
    dz.middleRows(2 * h, h) = dc.cwiseProduct(i).cwiseProduct((Scalar(1) - g.array().square()).matrix());
    dz.bottomRows(h) = dh.cwiseProduct(s.tanh_c).cwiseProduct(o.cwiseProduct((Scalar(1) - o.array()).matrix()));

    grad.w_input.noalias() += dz * s.x.transpose();
    grad.w_recurrent.noalias() += dz * s.h_prev.transpose();
    grad.bias += dz.rowwise().sum();

    d_inputs[step].noalias() = p.w_input.transpose() * dz;
    dh_next.noalias() = p.w_recurrent.transpose() * dz;
    dc_next = dc.cwiseProduct(f);
  }
  return d_inputs;
}

}  // namespace pedtwin::nn
