#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "pedtwin/model.hpp"

namespace pedtwin {

/// Supervised pairs in chronological order: raw (unnormalized) feature
/// windows and the distance travelled at each future step, in meters.
struct Dataset {
  std::vector<FeatureWindow> windows;
  std::vector<Eigen::VectorXd> targets;

  std::size_t size() const { return windows.size(); }
  void append(const Dataset& other);
};

struct TrainReport {
  std::vector<double> train_mae;  ///< meters, per epoch
  std::vector<double> val_mae;    ///< meters, per epoch
  double test_rmse = 0.0;         ///< meters, held-out split, final model
  double initial_test_rmse = 0.0; ///< meters, held-out split, untrained model
  std::uint64_t seed = 0;
  std::size_t train_size = 0;
  std::size_t test_size = 0;
};

struct TrainResult {
  EncoderDecoderModel model;
  TrainReport report;
};

using EpochCallback = std::function<void(int epoch, double train_mae, double val_mae)>;

/// Chronological split: the first floor(split * n) pairs train (at least
/// one), the rest validate and test. Normalization is fitted on the training
/// part. Deterministic for a given config.seed.
TrainResult train(Role role, const ModelConfig& config, const Dataset& data, double split = 0.8,
                  const EpochCallback& on_epoch = {});

/// Mean MAE gradient over a batch of normalized windows / unit targets.
/// Returns the loss value and fills `grad`.
double batch_gradient(const EncoderDecoderModel& model, std::span<const FeatureWindow> windows,
                      std::span<const Eigen::VectorXd> unit_targets, nn::Seq2SeqWeights<double>& grad);

/// Predictions (n x output_steps, meters) for raw windows.
Eigen::MatrixXd predict_raw(const EncoderDecoderModel& model, std::span<const FeatureWindow> raw_windows);

/// RMSE in meters over every predicted entry of a raw dataset.
double evaluate_rmse(const EncoderDecoderModel& model, const Dataset& data);
double evaluate_mae(const EncoderDecoderModel& model, const Dataset& data);

}  // namespace pedtwin
