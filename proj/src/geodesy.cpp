#include "pedtwin/geodesy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "pedtwin/errors.hpp"

namespace pedtwin::geo {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kRadToDeg = 180.0 / std::numbers::pi;

// Longitude difference b - a wrapped to (-180, 180].
double delta_lon(double a, double b) { return wrap_180(b - a); }

}  // namespace

GeoPoint::GeoPoint(double lat_deg, double lon_deg) : lat_(lat_deg), lon_(lon_deg) {
  if (!std::isfinite(lat_deg) || !std::isfinite(lon_deg) || lat_deg < -90.0 || lat_deg > 90.0 ||
      lon_deg < -180.0 || lon_deg > 180.0) {
    throw ValidationError("GeoPoint out of range: lat=" + std::to_string(lat_deg) +
                          " lon=" + std::to_string(lon_deg));
  }
}

double wrap_360(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w < 0.0) w += 360.0;
  if (w >= 360.0) w = 0.0;
  return w;
}

double wrap_180(double deg) {
  if (deg > -180.0 && deg <= 180.0) return deg;
  double w = wrap_360(deg);
  return w > 180.0 ? w - 360.0 : w;
}

double haversine_distance(const GeoPoint& a, const GeoPoint& b) {
  const double phi1 = a.lat_deg() * kDegToRad;
  const double phi2 = b.lat_deg() * kDegToRad;
  const double dphi = phi2 - phi1;
  const double dlambda = delta_lon(a.lon_deg(), b.lon_deg()) * kDegToRad;
  const double s1 = std::sin(dphi / 2.0);
  const double s2 = std::sin(dlambda / 2.0);
  const double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
  return 2.0 * kEarthRadiusM * std::asin(std::min(1.0, std::sqrt(h)));
}

double bearing(const GeoPoint& a, const GeoPoint& b) {
  if (a == b) throw DegenerateInput("bearing between identical points");
  const double phi1 = a.lat_deg() * kDegToRad;
  const double phi2 = b.lat_deg() * kDegToRad;
  const double dlambda = delta_lon(a.lon_deg(), b.lon_deg()) * kDegToRad;
  const double y = std::sin(dlambda) * std::cos(phi2);
  const double x = std::cos(phi1) * std::sin(phi2) - std::sin(phi1) * std::cos(phi2) * std::cos(dlambda);
  return wrap_360(std::atan2(y, x) * kRadToDeg);
}

Eigen::Vector2d to_local(const GeoPoint& origin, const GeoPoint& p) {
  const double coslat = std::cos(origin.lat_deg() * kDegToRad);
  return {kEarthRadiusM * delta_lon(origin.lon_deg(), p.lon_deg()) * kDegToRad * coslat,
          kEarthRadiusM * (p.lat_deg() - origin.lat_deg()) * kDegToRad};
}

GeoPoint from_local(const GeoPoint& origin, const Eigen::Vector2d& east_north) {
  const double coslat = std::cos(origin.lat_deg() * kDegToRad);
  const double lat = origin.lat_deg() + east_north.y() / kEarthRadiusM * kRadToDeg;
  const double lon = wrap_180(origin.lon_deg() + east_north.x() / (kEarthRadiusM * coslat) * kRadToDeg);
  return {lat, lon};
}

GeoPoint offset(const GeoPoint& p, double east_m, double north_m) {
  return from_local(p, Eigen::Vector2d(east_m, north_m));
}

PathPolyline build_path(std::span<const GeoPoint> vertices) {
  if (vertices.size() < 2) throw DegenerateInput("path needs at least two vertices");
  PathPolyline path;
  path.vertices_.assign(vertices.begin(), vertices.end());
  path.cum_s_.reserve(vertices.size());
  path.cum_s_.push_back(0.0);
  for (std::size_t i = 1; i < vertices.size(); ++i) {
    if (vertices[i] == vertices[i - 1]) {
      throw DegenerateInput("duplicate consecutive vertex at index " + std::to_string(i));
    }
    const double d = haversine_distance(vertices[i - 1], vertices[i]);
    if (!(d > 0.0)) throw DegenerateInput("zero-length segment at index " + std::to_string(i));
    path.cum_s_.push_back(path.cum_s_.back() + d);
  }
  return path;
}

PathPolyline concat_paths(const PathPolyline& a, const PathPolyline& b) {
  std::vector<GeoPoint> v = a.vertices();
  auto first = b.vertices().begin();
  if (*first == v.back()) ++first;
  v.insert(v.end(), first, b.vertices().end());
  return build_path(v);
}

PathFix project_onto_path(const PathPolyline& path, const GeoPoint& p) {
  const auto& v = path.vertices();
  const auto& cum = path.cum_s();

  std::size_t nearest = 0;
  double nearest_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) {
    const double d = haversine_distance(v[i], p);
    if (d < nearest_d) {
      nearest_d = d;
      nearest = i;
    }
  }
  const GeoPoint& origin = v[nearest];
  const Eigen::Vector2d q = to_local(origin, p);

  PathFix best;
  double best_dist = std::numeric_limits<double>::infinity();
  Eigen::Vector2d a = to_local(origin, v[0]);
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const Eigen::Vector2d b = to_local(origin, v[i + 1]);
    const Eigen::Vector2d d = b - a;
    const double t = std::clamp((q - a).dot(d) / d.squaredNorm(), 0.0, 1.0);
    const Eigen::Vector2d r = q - (a + t * d);
    const double dist = r.norm();
    // Distances within a nanometer count as ties and keep the smaller s.
    if (dist < best_dist - 1e-9) {
      best_dist = dist;
      // z-component of d x r is positive when q lies left of travel.
      const double cross = d.x() * r.y() - d.y() * r.x();
      best.s = cum[i] + t * (cum[i + 1] - cum[i]);
      best.lateral_offset_m = cross > 0.0 ? -dist : (cross < 0.0 ? dist : 0.0);
      best.heading_deg = bearing(v[i], v[i + 1]);
    }
    a = b;
  }
  best.s = std::clamp(best.s, 0.0, path.length());
  return best;
}

PathPoint point_at_arc_length(const PathPolyline& path, double s) {
  if (s < 0.0) throw NegativeArcLength("negative arc length " + std::to_string(s));
  const auto& v = path.vertices();
  const auto& cum = path.cum_s();
  const std::size_t last_seg = v.size() - 2;

  if (s >= path.length()) {
    return {v.back(), bearing(v[last_seg], v[last_seg + 1]), s > path.length()};
  }
  auto it = std::upper_bound(cum.begin(), cum.end(), s);
  std::size_t i = static_cast<std::size_t>(std::distance(cum.begin(), it)) - 1;
  i = std::min(i, last_seg);
  const double t = (s - cum[i]) / (cum[i + 1] - cum[i]);
  const double lat = v[i].lat_deg() + t * (v[i + 1].lat_deg() - v[i].lat_deg());
  const double lon = wrap_180(v[i].lon_deg() + t * delta_lon(v[i].lon_deg(), v[i + 1].lon_deg()));
  return {GeoPoint(lat, lon), bearing(v[i], v[i + 1]), false};
}

}  // namespace pedtwin::geo
