#pragma once

#include <cstdint>
#include <span>
#include <string_view>

#include <Eigen/Core>

#include "pedtwin/encoder_decoder.hpp"
#include "pedtwin/normalization.hpp"
#include "pedtwin/sensor.hpp"

namespace pedtwin {

enum class Role { pedestrian, vehicle_through, vehicle_left };

std::string_view to_string(Role role);
Role role_from_string(std::string_view s);

/// Input window length each role is trained with.
int input_steps_for(Role role);

struct ModelConfig {
  int input_steps = 4;
  int output_steps = 8;
  int features_in = kFeatureCount;
  int enc1_units = 128;
  int enc2_units = 128;
  int dec_units = 64;
  double learning_rate = 0.01;
  int epochs = 100;
  int batch_size = 32;
  std::uint64_t seed = 1;
  /// Over the last `anneal_epochs` epochs the rate decays geometrically from
  /// learning_rate to learning_rate / 100. Zero keeps it constant.
  int anneal_epochs = 0;

  /// Rate used during 1-based `epoch`.
  double rate_at(int epoch) const;

  /// Full-size defaults for a role.
  static ModelConfig for_role(Role role);

  nn::Seq2SeqShape shape() const;

  /// Throws ValidationError on non-positive counts or learning rate.
  void validate() const;

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct EncoderDecoderModel {
  Role role = Role::pedestrian;
  ModelConfig config;
  NormParams norm;
  nn::Seq2SeqWeights<double> weights;

  /// Fresh model with seeded initial weights.
  static EncoderDecoderModel initialize(Role role, const ModelConfig& config, const NormParams& norm);

  /// Throws ShapeMismatch or ValidationError when the parts disagree.
  void check() const;
};

/// Predicted distances in meters for one normalized window.
Eigen::VectorXd forward(const EncoderDecoderModel& model, const FeatureWindow& window);

/// Batched variant: row i holds the prediction for windows[i].
Eigen::MatrixXd forward_batch(const EncoderDecoderModel& model, std::span<const FeatureWindow> windows);

/// Stacks normalized windows into per-step (features x batch) matrices.
std::vector<nn::Matrix<double>> to_step_major(std::span<const FeatureWindow> windows, int input_steps);

double mae(std::span<const double> pred, std::span<const double> truth);
double rmse(std::span<const double> pred, std::span<const double> truth);

/// k-th entry is k * dt * latest speed.
Eigen::VectorXd constant_velocity_predict(const TrackState& track, int steps, double dt);
Eigen::VectorXd constant_velocity_predict(double speed_mps, int steps, double dt);

}  // namespace pedtwin
