#pragma once

#include <string>
#include <vector>

#include "pedtwin/geodesy.hpp"
#include "pedtwin/risk.hpp"
#include "pedtwin/sensor.hpp"

namespace pedtwin {

/// File-level description of a site, as stored in site.json.
struct SiteSpec {
  std::vector<geo::GeoPoint> crosswalk;  ///< pedestrian path, curb-to-curb plus lead-in/out
  std::vector<geo::GeoPoint> approach;
  std::vector<geo::GeoPoint> through;    ///< starts at the approach end
  std::vector<geo::GeoPoint> left_turn;  ///< starts at the approach end
  double crosswalk_s_min = 0.0;          ///< marked crosswalk along the pedestrian path
  double crosswalk_s_max = 0.0;
  double crosswalk_width_m = 3.0;
  double lane_half_width_m = 5.0;
  double speed_limit_mps = 11.176;
  double ssd_m = 47.24;
  double crossing_time_s = 15.0;
};

/// Validated site with derived paths and detection zones.
struct Site {
  SiteSpec spec;
  geo::PathPolyline crosswalk;
  geo::PathPolyline approach;
  geo::PathPolyline through_path;  ///< approach followed by the through continuation
  geo::PathPolyline left_path;     ///< approach followed by the left-turn arc
  DetectionZone ped_zone;
  DetectionZone veh_zone;
  VehicleZoneBounds veh_bounds;
  double conflict_s_approach = 0.0;   ///< where the crosswalk crosses the approach
  double conflict_s_crosswalk = 0.0;  ///< same point along the pedestrian path

  const geo::PathPolyline& maneuver_path(risk::Maneuver m) const {
    return m == risk::Maneuver::through ? through_path : left_path;
  }
};

/// Throws ValidationError / DegenerateInput / InvalidZone on a bad spec.
Site build_site(const SiteSpec& spec);

std::string site_to_json(const SiteSpec& spec);
SiteSpec site_from_json(const std::string& text);
void save_site(const SiteSpec& spec, const std::string& path);
Site load_site(const std::string& path);

}  // namespace pedtwin
