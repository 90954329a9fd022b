#include "pedtwin/normalization.hpp"

#include <limits>

#include "pedtwin/errors.hpp"

namespace pedtwin {

namespace {

double scale(double x, double lo, double hi) { return hi > lo ? (x - lo) / (hi - lo) : 0.0; }
double unscale(double y, double lo, double hi) { return hi > lo ? lo + y * (hi - lo) : lo; }

}  // namespace

Eigen::MatrixXd NormParams::normalize_inputs(const Eigen::MatrixXd& raw) const {
  if (raw.cols() != kFeatureCount) throw ShapeMismatch("feature block must have 8 columns");
  Eigen::MatrixXd out(raw.rows(), raw.cols());
  for (int j = 0; j < kFeatureCount; ++j) {
    for (Eigen::Index i = 0; i < raw.rows(); ++i) out(i, j) = scale(raw(i, j), in_min[j], in_max[j]);
  }
  return out;
}

Eigen::MatrixXd NormParams::denormalize_inputs(const Eigen::MatrixXd& scaled) const {
  if (scaled.cols() != kFeatureCount) throw ShapeMismatch("feature block must have 8 columns");
  Eigen::MatrixXd out(scaled.rows(), scaled.cols());
  for (int j = 0; j < kFeatureCount; ++j) {
    for (Eigen::Index i = 0; i < scaled.rows(); ++i) out(i, j) = unscale(scaled(i, j), in_min[j], in_max[j]);
  }
  return out;
}

double NormParams::normalize_output(double meters) const { return scale(meters, out_min, out_max); }
double NormParams::denormalize_output(double scaled) const { return unscale(scaled, out_min, out_max); }

NormParams fit_norm(std::span<const Eigen::MatrixXd> raw_windows, std::span<const Eigen::VectorXd> targets) {
  if (raw_windows.empty() || targets.empty()) throw EmptyDataset("cannot fit normalization on empty data");
  constexpr double inf = std::numeric_limits<double>::infinity();
  NormParams p;
  p.in_min.setConstant(inf);
  p.in_max.setConstant(-inf);
  for (const auto& w : raw_windows) {
    if (w.cols() != kFeatureCount) throw ShapeMismatch("feature block must have 8 columns");
    p.in_min = p.in_min.cwiseMin(w.colwise().minCoeff().transpose());
    p.in_max = p.in_max.cwiseMax(w.colwise().maxCoeff().transpose());
  }
  p.out_min = inf;
  p.out_max = -inf;
  for (const auto& t : targets) {
    p.out_min = std::min(p.out_min, t.minCoeff());
    p.out_max = std::max(p.out_max, t.maxCoeff());
  }
  return p;
}

}  // namespace pedtwin
