#include "pedtwin/model.hpp"

#include <cmath>
#include <string>

#include "pedtwin/errors.hpp"

namespace pedtwin {

std::string_view to_string(Role role) {
  switch (role) {
    case Role::pedestrian:
      return "pedestrian";
    case Role::vehicle_through:
      return "vehicle_through";
    case Role::vehicle_left:
      return "vehicle_left";
  }
  return "pedestrian";
}

Role role_from_string(std::string_view s) {
  if (s == "pedestrian") return Role::pedestrian;
  if (s == "vehicle_through") return Role::vehicle_through;
  if (s == "vehicle_left") return Role::vehicle_left;
  throw ValidationError("unknown role '" + std::string(s) + "'");
}

int input_steps_for(Role role) { return role == Role::pedestrian ? 4 : 10; }

ModelConfig ModelConfig::for_role(Role role) {
  ModelConfig c;
  c.input_steps = input_steps_for(role);
  return c;
}

nn::Seq2SeqShape ModelConfig::shape() const {
  return {features_in, input_steps, output_steps, enc1_units, enc2_units, dec_units};
}

void ModelConfig::validate() const {
  if (input_steps <= 0 || output_steps <= 0 || enc1_units <= 0 || enc2_units <= 0 || dec_units <= 0 ||
      epochs <= 0 || batch_size <= 0) {
    throw ValidationError("model config counts must be positive");
  }
  if (features_in != kFeatureCount) throw ValidationError("model expects 8 input features");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ValidationError("learning rate must be positive");
  }
  if (anneal_epochs < 0 || anneal_epochs > epochs) {
    throw ValidationError("anneal_epochs must lie in [0, epochs]");
  }
}

double ModelConfig::rate_at(int epoch) const {
  const int first = epochs - anneal_epochs;
  if (anneal_epochs == 0 || epoch <= first) return learning_rate;
  const double progress = static_cast<double>(epoch - first) / anneal_epochs;
  return learning_rate * std::pow(0.01, progress);
}

EncoderDecoderModel EncoderDecoderModel::initialize(Role role, const ModelConfig& config, const NormParams& norm) {
  EncoderDecoderModel m;
  m.role = role;
  m.config = config;
  m.norm = norm;
  m.weights = nn::init_weights<double>(config.shape(), config.seed);
  m.check();
  return m;
}

void EncoderDecoderModel::check() const {
  config.validate();
  if (config.input_steps != input_steps_for(role)) {
    throw ValidationError("role " + std::string(to_string(role)) + " requires " +
                          std::to_string(input_steps_for(role)) + " input steps, config has " +
                          std::to_string(config.input_steps));
  }
  if (!weights.matches(config.shape())) throw ShapeMismatch("weights do not match model config");
}

std::vector<nn::Matrix<double>> to_step_major(std::span<const FeatureWindow> windows, int input_steps) {
  const auto batch = static_cast<Eigen::Index>(windows.size());
  std::vector<nn::Matrix<double>> steps(static_cast<std::size_t>(input_steps),
                                        nn::Matrix<double>(kFeatureCount, batch));
  for (Eigen::Index b = 0; b < batch; ++b) {
    const auto& w = windows[static_cast<std::size_t>(b)];
    if (w.values.rows() != input_steps || w.values.cols() != kFeatureCount) {
      throw ShapeMismatch("window is " + std::to_string(w.values.rows()) + "x" + std::to_string(w.values.cols()) +
                          ", model expects " + std::to_string(input_steps) + "x8");
    }
    for (int t = 0; t < input_steps; ++t) steps[static_cast<std::size_t>(t)].col(b) = w.values.row(t).transpose();
  }
  return steps;
}

Eigen::MatrixXd forward_batch(const EncoderDecoderModel& model, std::span<const FeatureWindow> windows) {
  for (const auto& w : windows) {
    if (!w.normalized) throw ValidationError("forward expects normalized windows");
  }
  if (windows.empty()) return Eigen::MatrixXd(0, model.config.output_steps);
  const auto out = nn::seq2seq_forward(model.weights, model.config.shape(),
                                       to_step_major(windows, model.config.input_steps));
  return model.norm.denormalize_outputs(out.transpose());
}

Eigen::VectorXd forward(const EncoderDecoderModel& model, const FeatureWindow& window) {
  return forward_batch(model, std::span<const FeatureWindow>(&window, 1)).row(0).transpose();
}

namespace {

void check_pair(std::span<const double> pred, std::span<const double> truth) {
  if (pred.size() != truth.size()) {
    throw LengthMismatch("lengths differ: " + std::to_string(pred.size()) + " vs " + std::to_string(truth.size()));
  }
  if (pred.empty()) throw EmptyInput("metric of empty sequences");
}

}  // namespace

double mae(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - truth[i]);
  return sum / static_cast<double>(pred.size());
}

double rmse(std::span<const double> pred, std::span<const double> truth) {
  check_pair(pred, truth);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - truth[i]) * (pred[i] - truth[i]);
  return std::sqrt(sum / static_cast<double>(pred.size()));
}

Eigen::VectorXd constant_velocity_predict(double speed_mps, int steps, double dt) {
  return Eigen::VectorXd::LinSpaced(steps, 1.0, static_cast<double>(steps)) * (dt * speed_mps);
}

Eigen::VectorXd constant_velocity_predict(const TrackState& track, int steps, double dt) {
  if (track.history.empty()) throw InsufficientHistory("constant-velocity prediction needs one sample");
  return constant_velocity_predict(track.history.back().record.speed_mps, steps, dt);
}

}  // namespace pedtwin
