#pragma once

#include <string_view>

#include "pedtwin/geodesy.hpp"

namespace pedtwin::risk {

enum class Maneuver { through, left_turn };

std::string_view to_string(Maneuver m);
Maneuver maneuver_from_string(std::string_view s);

/// Collision risk region: a circular sector ahead of the vehicle.
struct CrrParams {
  double stop_distance_m = 16.95;
  double vehicle_width_m = 2.6;
  double half_angle_deg = 0.0;

  /// Defaults with the half-angle derived from width and stop distance.
  static CrrParams make(double stop_distance_m = 16.95, double vehicle_width_m = 2.6);
};

/// arctan(width / stop_distance) in degrees. Throws NonPositiveInput.
double crr_half_angle(double vehicle_width_m, double stop_distance_m);

struct RelativeGeometry {
  double distance_m = 0.0;
  double bearing_offset_deg = 0.0;  ///< (-180, 180], positive right of heading

  friend bool operator==(const RelativeGeometry&, const RelativeGeometry&) = default;
};

/// Coincident positions give distance 0 and offset 0.
RelativeGeometry relative_geometry(const geo::GeoPoint& vehicle_pos, double vehicle_heading_deg,
                                   const geo::GeoPoint& ped_pos);

/// Inclusive on both the radius and the half-angle.
bool in_crr(const RelativeGeometry& g, const CrrParams& params);

/// stop distance / pedestrian-vehicle distance. Throws ZeroDistance.
double compute_cre(double stop_distance_m, double ped_veh_distance_m);

struct VehiclePose {
  geo::GeoPoint pos;
  double heading_deg = 0.0;
};

struct RiskAssessment {
  int step_k = 0;
  Maneuver maneuver = Maneuver::through;
  RelativeGeometry geometry;
  bool in_crr = false;
  double cre = 0.0;  ///< +inf when the positions coincide
  bool is_crash = false;
  geo::GeoPoint ped_pos;
  geo::GeoPoint veh_pos;

  friend bool operator==(const RiskAssessment&, const RiskAssessment&) = default;
};

/// Crash iff inside the region and CRE strictly above 1. Zero distance is a
/// crash with CRE reported as +infinity.
RiskAssessment assess_step(int k, Maneuver maneuver, const VehiclePose& vehicle, const geo::GeoPoint& ped_pos,
                           const CrrParams& params);

/// Verdict from geometry alone, used where positions are not at hand.
RiskAssessment assess_geometry(int k, Maneuver maneuver, const RelativeGeometry& g, const CrrParams& params);

}  // namespace pedtwin::risk
