#include "pedtwin/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pedtwin/adam.hpp"
#include "pedtwin/errors.hpp"

namespace pedtwin {

void Dataset::append(const Dataset& other) {
  windows.insert(windows.end(), other.windows.begin(), other.windows.end());
  targets.insert(targets.end(), other.targets.begin(), other.targets.end());
}

namespace {

Dataset slice(const Dataset& d, std::size_t begin, std::size_t end) {
  Dataset out;
  out.windows.assign(d.windows.begin() + static_cast<std::ptrdiff_t>(begin),
                     d.windows.begin() + static_cast<std::ptrdiff_t>(end));
  out.targets.assign(d.targets.begin() + static_cast<std::ptrdiff_t>(begin),
                     d.targets.begin() + static_cast<std::ptrdiff_t>(end));
  return out;
}

std::vector<FeatureWindow> normalized(const NormParams& norm, std::span<const FeatureWindow> raw) {
  std::vector<FeatureWindow> out;
  out.reserve(raw.size());
  for (const auto& w : raw) out.push_back({norm.normalize_inputs(w.values), true});
  return out;
}

std::vector<Eigen::VectorXd> unit_targets(const NormParams& norm, std::span<const Eigen::VectorXd> targets) {
  std::vector<Eigen::VectorXd> out;
  out.reserve(targets.size());
  for (const auto& t : targets) out.push_back(norm.normalize_outputs(t));
  return out;
}

nn::Matrix<double> stack_targets(std::span<const Eigen::VectorXd> targets, int output_steps) {
  nn::Matrix<double> m(output_steps, static_cast<Eigen::Index>(targets.size()));
  for (std::size_t b = 0; b < targets.size(); ++b) {
    if (targets[b].size() != output_steps) throw ShapeMismatch("target length differs from output steps");
    m.col(static_cast<Eigen::Index>(b)) = targets[b];
  }
  return m;
}

// Mean absolute error in meters over a normalized set, evaluated in chunks.
double set_mae_m(const EncoderDecoderModel& model, const std::vector<FeatureWindow>& windows,
                 const std::vector<Eigen::VectorXd>& targets) {
  if (windows.empty()) return 0.0;
  constexpr std::size_t kChunk = 256;
  double sum = 0.0;
  for (std::size_t b = 0; b < windows.size(); b += kChunk) {
    const std::size_t e = std::min(windows.size(), b + kChunk);
    const auto pred = nn::seq2seq_forward(
        model.weights, model.config.shape(),
        to_step_major(std::span<const FeatureWindow>(windows).subspan(b, e - b), model.config.input_steps));
    const auto truth = stack_targets(std::span<const Eigen::VectorXd>(targets).subspan(b, e - b),
                                     model.config.output_steps);
    sum += (pred - truth).cwiseAbs().sum();
  }
  const double range = model.norm.out_max - model.norm.out_min;
  return sum / static_cast<double>(windows.size() * static_cast<std::size_t>(model.config.output_steps)) * range;
}

}  // namespace

double batch_gradient(const EncoderDecoderModel& model, std::span<const FeatureWindow> windows,
                      std::span<const Eigen::VectorXd> unit_targets, nn::Seq2SeqWeights<double>& grad) {
  const auto shape = model.config.shape();
  nn::Seq2SeqCache<double> cache;
  const auto pred = nn::seq2seq_forward(model.weights, shape, to_step_major(windows, shape.input_steps), &cache);
  nn::Matrix<double> d_pred;
  const double loss = nn::mae_loss(pred, stack_targets(unit_targets, shape.output_steps), &d_pred);
  grad = nn::seq2seq_backward(model.weights, shape, cache, d_pred);
  return loss;
}

Eigen::MatrixXd predict_raw(const EncoderDecoderModel& model, std::span<const FeatureWindow> raw_windows) {
  const auto norm_windows = normalized(model.norm, raw_windows);
  return forward_batch(model, norm_windows);
}

double evaluate_rmse(const EncoderDecoderModel& model, const Dataset& data) {
  if (data.size() == 0) throw EmptyDataset("cannot evaluate on an empty dataset");
  const Eigen::MatrixXd pred = predict_raw(model, data.windows);
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    sum += (pred.row(static_cast<Eigen::Index>(i)).transpose() - data.targets[i]).squaredNorm();
  }
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

double evaluate_mae(const EncoderDecoderModel& model, const Dataset& data) {
  if (data.size() == 0) throw EmptyDataset("cannot evaluate on an empty dataset");
  const Eigen::MatrixXd pred = predict_raw(model, data.windows);
  double sum = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    sum += (pred.row(static_cast<Eigen::Index>(i)).transpose() - data.targets[i]).cwiseAbs().sum();
  }
  return sum / static_cast<double>(pred.size());
}

TrainResult train(Role role, const ModelConfig& config, const Dataset& data, double split,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (data.size() == 0) throw EmptyDataset("training dataset is empty");
  if (data.windows.size() != data.targets.size()) throw LengthMismatch("windows and targets differ in count");
  if (!(split > 0.0 && split < 1.0)) throw ValidationError("split must lie in (0, 1)");

  const std::size_t n = data.size();
  const std::size_t n_train = std::clamp<std::size_t>(static_cast<std::size_t>(std::floor(split * n)), 1, n);
  const Dataset train_set = slice(data, 0, n_train);
  const Dataset test_set = slice(data, n_train, n);

  const NormParams norm = fit_norm([&] {
    std::vector<Eigen::MatrixXd> v;
    v.reserve(train_set.size());
    for (const auto& w : train_set.windows) v.push_back(w.values);
    return v;
  }(), train_set.targets);

  TrainResult result{EncoderDecoderModel::initialize(role, config, norm), {}};
  EncoderDecoderModel& model = result.model;
  TrainReport& report = result.report;
  report.seed = config.seed;
  report.train_size = train_set.size();
  report.test_size = test_set.size();
  if (!test_set.windows.empty()) report.initial_test_rmse = evaluate_rmse(model, test_set);

  const auto xs = normalized(norm, train_set.windows);
  const auto ys = unit_targets(norm, train_set.targets);
  const auto val_xs = normalized(norm, test_set.windows);
  const auto val_ys = unit_targets(norm, test_set.targets);

  auto adam = nn::make_adam_state<double>(config.shape());
  nn::AdamOptions opt{config.learning_rate};
  std::mt19937_64 shuffle_rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);

  const auto batch = static_cast<std::size_t>(config.batch_size);
  std::vector<FeatureWindow> bx;
  std::vector<Eigen::VectorXd> by;
  nn::Seq2SeqWeights<double> grad;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    opt.learning_rate = config.rate_at(epoch);
    std::shuffle(order.begin(), order.end(), shuffle_rng);
    for (std::size_t b = 0; b < order.size(); b += batch) {
      const std::size_t e = std::min(order.size(), b + batch);
      bx.clear();
      by.clear();
      for (std::size_t i = b; i < e; ++i) {
        bx.push_back(xs[order[i]]);
        by.push_back(ys[order[i]]);
      }
      batch_gradient(model, bx, by, grad);
      nn::adam_step(model.weights, grad, adam, opt);
    }
    report.train_mae.push_back(set_mae_m(model, xs, ys));
    report.val_mae.push_back(set_mae_m(model, val_xs, val_ys));
    if (on_epoch) on_epoch(epoch, report.train_mae.back(), report.val_mae.back());
  }
  if (!test_set.windows.empty()) report.test_rmse = evaluate_rmse(model, test_set);
  return result;
}

}  // namespace pedtwin
