#pragma once

#include <span>

#include <Eigen/Core>

namespace pedtwin {

/// Number of per-step input channels: speed, accel xyz, gyro xyz, distance.
inline constexpr int kFeatureCount = 8;

using FeatureVector = Eigen::Matrix<double, kFeatureCount, 1>;

/// Min-max scaling parameters, fitted on training data. A feature whose
/// range collapses (max == min) maps to 0.
struct NormParams {
  FeatureVector in_min = FeatureVector::Zero();
  FeatureVector in_max = FeatureVector::Zero();
  double out_min = 0.0;
  double out_max = 0.0;

  /// Scales a (steps x 8) block of raw features into [0, 1].
  Eigen::MatrixXd normalize_inputs(const Eigen::MatrixXd& raw) const;
  Eigen::MatrixXd denormalize_inputs(const Eigen::MatrixXd& scaled) const;

  double normalize_output(double meters) const;
  double denormalize_output(double scaled) const;

  template <typename Derived>
  Eigen::MatrixXd normalize_outputs(const Eigen::MatrixBase<Derived>& m) const {
    return m.unaryExpr([this](double x) { return normalize_output(x); });
  }
  template <typename Derived>
  Eigen::MatrixXd denormalize_outputs(const Eigen::MatrixBase<Derived>& m) const {
    return m.unaryExpr([this](double x) { return denormalize_output(x); });
  }

  friend bool operator==(const NormParams&, const NormParams&) = default;
};

/// Fits per-feature ranges over every row of every window, and the output
/// range over every target entry.
NormParams fit_norm(std::span<const Eigen::MatrixXd> raw_windows, std::span<const Eigen::VectorXd> targets);

}  // namespace pedtwin
