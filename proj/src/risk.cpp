#include "pedtwin/risk.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pedtwin/errors.hpp"

namespace pedtwin::risk {

std::string_view to_string(Maneuver m) { return m == Maneuver::through ? "through" : "left_turn"; }

Maneuver maneuver_from_string(std::string_view s) {
  if (s == "through") return Maneuver::through;
  if (s == "left_turn") return Maneuver::left_turn;
  throw ValidationError("unknown maneuver '" + std::string(s) + "'");
}

double crr_half_angle(double vehicle_width_m, double stop_distance_m) {
  if (!(vehicle_width_m > 0.0) || !(stop_distance_m > 0.0)) {
    throw NonPositiveInput("vehicle width and stop distance must be positive");
  }
  return std::atan(vehicle_width_m / stop_distance_m) * 180.0 / std::numbers::pi;
}

CrrParams CrrParams::make(double stop_distance_m, double vehicle_width_m) {
  return {stop_distance_m, vehicle_width_m, crr_half_angle(vehicle_width_m, stop_distance_m)};
}

RelativeGeometry relative_geometry(const geo::GeoPoint& vehicle_pos, double vehicle_heading_deg,
                                   const geo::GeoPoint& ped_pos) {
  if (vehicle_pos == ped_pos) return {0.0, 0.0};
  const double d = geo::haversine_distance(vehicle_pos, ped_pos);
  if (d == 0.0) return {0.0, 0.0};
  return {d, geo::wrap_180(geo::bearing(vehicle_pos, ped_pos) - vehicle_heading_deg)};
}

bool in_crr(const RelativeGeometry& g, const CrrParams& params) {
  return g.distance_m <= params.stop_distance_m && std::abs(g.bearing_offset_deg) <= params.half_angle_deg;
}

double compute_cre(double stop_distance_m, double ped_veh_distance_m) {
  if (!(ped_veh_distance_m > 0.0)) throw ZeroDistance("pedestrian-vehicle distance is zero");
  return stop_distance_m / ped_veh_distance_m;
}

RiskAssessment assess_geometry(int k, Maneuver maneuver, const RelativeGeometry& g, const CrrParams& params) {
  RiskAssessment a;
  a.step_k = k;
  a.maneuver = maneuver;
  a.geometry = g;
  a.in_crr = in_crr(g, params);
  try {
    a.cre = compute_cre(params.stop_distance_m, g.distance_m);
    a.is_crash = a.in_crr && a.cre > 1.0;
  } catch (const ZeroDistance&) {
    a.cre = std::numeric_limits<double>::infinity();
    a.is_crash = true;
  }
  return a;
}

RiskAssessment assess_step(int k, Maneuver maneuver, const VehiclePose& vehicle, const geo::GeoPoint& ped_pos,
                           const CrrParams& params) {
  RiskAssessment a =
      assess_geometry(k, maneuver, relative_geometry(vehicle.pos, vehicle.heading_deg, ped_pos), params);
  a.ped_pos = ped_pos;
  a.veh_pos = vehicle.pos;
  return a;
}

}  // namespace pedtwin::risk
