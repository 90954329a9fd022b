#include "pedtwin/site.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

#include <json.hpp>

#include "pedtwin/errors.hpp"

namespace pedtwin {

using nlohmann::ordered_json;

namespace {

std::optional<geo::GeoPoint> first_crossing(const geo::PathPolyline& a, const geo::PathPolyline& b) {
  const geo::GeoPoint origin = a.vertices().front();
  auto local = [&](const geo::GeoPoint& p) { return geo::to_local(origin, p); };
  for (std::size_t i = 0; i + 1 < a.vertices().size(); ++i) {
    const Eigen::Vector2d p = local(a.vertices()[i]);
    const Eigen::Vector2d r = local(a.vertices()[i + 1]) - p;
    for (std::size_t j = 0; j + 1 < b.vertices().size(); ++j) {
      const Eigen::Vector2d q = local(b.vertices()[j]);
      const Eigen::Vector2d s = local(b.vertices()[j + 1]) - q;
      const double denom = r.x() * s.y() - r.y() * s.x();
      if (std::abs(denom) < 1e-12) continue;
      const Eigen::Vector2d qp = q - p;
      const double t = (qp.x() * s.y() - qp.y() * s.x()) / denom;
      const double u = (qp.x() * r.y() - qp.y() * r.x()) / denom;
      if (t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0) return geo::from_local(origin, p + t * r);
    }
  }
  return std::nullopt;
}

ordered_json points_to_json(const std::vector<geo::GeoPoint>& pts) {
  ordered_json arr = ordered_json::array();
  for (const auto& p : pts) arr.push_back({p.lat_deg(), p.lon_deg()});
  return arr;
}

std::vector<geo::GeoPoint> points_from_json(const ordered_json& j, const char* name) {
  if (!j.is_array()) throw ValidationError(std::string("path '") + name + "' must be an array");
  std::vector<geo::GeoPoint> pts;
  for (const auto& v : j) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      throw ValidationError(std::string("path '") + name + "' vertices must be [lat, lon] pairs");
    }
    pts.emplace_back(v[0].get<double>(), v[1].get<double>());
  }
  return pts;
}

double positive(const ordered_json& j, const char* key) {
  const double v = j.at(key).get<double>();
  if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string("site field '") + key + "' must be positive");
  return v;
}

}  // namespace

Site build_site(const SiteSpec& spec) {
  Site site;
  site.spec = spec;
  site.crosswalk = geo::build_path(spec.crosswalk);
  site.approach = geo::build_path(spec.approach);
  const auto through = geo::build_path(spec.through);
  const auto left = geo::build_path(spec.left_turn);
  if (!(through.vertices().front() == site.approach.vertices().back()) ||
      !(left.vertices().front() == site.approach.vertices().back())) {
    throw ValidationError("through and left-turn paths must start at the approach end");
  }
  site.through_path = geo::concat_paths(site.approach, through);
  site.left_path = geo::concat_paths(site.approach, left);

  const auto crossing = first_crossing(site.crosswalk, site.approach);
  if (!crossing) throw ValidationError("crosswalk does not cross the approach path");
  site.conflict_s_approach = geo::project_onto_path(site.approach, *crossing).s;
  site.conflict_s_crosswalk = geo::project_onto_path(site.crosswalk, *crossing).s;

  if (!(spec.crosswalk_width_m > 0.0) || !(spec.lane_half_width_m > 0.0)) {
    throw ValidationError("crosswalk width and lane half width must be positive");
  }
  site.ped_zone = DetectionZone::make(AgentKind::pedestrian, site.crosswalk, spec.crosswalk_s_min,
                                      spec.crosswalk_s_max, spec.crosswalk_width_m / 2.0);
  site.veh_bounds = compute_vehicle_zone(spec.ssd_m, spec.speed_limit_mps, spec.crossing_time_s);
  site.veh_zone = DetectionZone::make(AgentKind::vehicle, site.approach,
                                      site.conflict_s_approach - site.veh_bounds.start_m,
                                      site.conflict_s_approach - site.veh_bounds.final_m, spec.lane_half_width_m);
  return site;
}

std::string site_to_json(const SiteSpec& spec) {
  ordered_json j;
  j["paths"] = {{"crosswalk", points_to_json(spec.crosswalk)},
                {"approach", points_to_json(spec.approach)},
                {"through", points_to_json(spec.through)},
                {"left_turn", points_to_json(spec.left_turn)}};
  j["crosswalk_s_min"] = spec.crosswalk_s_min;
  j["crosswalk_s_max"] = spec.crosswalk_s_max;
  j["crosswalk_width_m"] = spec.crosswalk_width_m;
  j["lane_half_width_m"] = spec.lane_half_width_m;
  j["speed_limit_mps"] = spec.speed_limit_mps;
  j["ssd_m"] = spec.ssd_m;
  j["crossing_time_s"] = spec.crossing_time_s;
  return j.dump(2);
}

SiteSpec site_from_json(const std::string& text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const ordered_json::exception& e) {
    throw ValidationError(std::string("site file is not valid JSON: ") + e.what());
  }
  try {
    SiteSpec s;
    const auto& paths = j.at("paths");
    s.crosswalk = points_from_json(paths.at("crosswalk"), "crosswalk");
    s.approach = points_from_json(paths.at("approach"), "approach");
    s.through = points_from_json(paths.at("through"), "through");
    s.left_turn = points_from_json(paths.at("left_turn"), "left_turn");
    s.crosswalk_s_min = j.at("crosswalk_s_min").get<double>();
    s.crosswalk_s_max = j.at("crosswalk_s_max").get<double>();
    s.crosswalk_width_m = positive(j, "crosswalk_width_m");
    s.lane_half_width_m = positive(j, "lane_half_width_m");
    s.speed_limit_mps = positive(j, "speed_limit_mps");
    s.ssd_m = positive(j, "ssd_m");
    s.crossing_time_s = positive(j, "crossing_time_s");
    return s;
  } catch (const ordered_json::exception& e) {
    throw ValidationError(std::string("malformed site file: ") + e.what());
  }
}

void save_site(const SiteSpec& spec, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write site file " + path);
  out << site_to_json(spec) << '\n';
}

Site load_site(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open site file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return build_site(site_from_json(ss.str()));
}

}  // namespace pedtwin
