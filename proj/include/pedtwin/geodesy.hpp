#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

namespace pedtwin::geo {

/// Mean Earth radius in meters used by every spherical computation.
inline constexpr double kEarthRadiusM = 6371000.0;

/// Latitude/longitude pair in degrees. Construction validates the range, so
/// any GeoPoint in circulation is usable by the geodesic functions.
class GeoPoint {
 public:
  GeoPoint() = default;
  GeoPoint(double lat_deg, double lon_deg);

  double lat_deg() const { return lat_; }
  double lon_deg() const { return lon_; }

  friend bool operator==(const GeoPoint&, const GeoPoint&) = default;

 private:
  double lat_ = 0.0;
  double lon_ = 0.0;
};

/// Great-circle distance in meters (Haversine).
double haversine_distance(const GeoPoint& a, const GeoPoint& b);

/// Initial great-circle bearing from a to b in degrees, [0, 360), 0 = north.
/// Throws DegenerateInput when a == b.
double bearing(const GeoPoint& a, const GeoPoint& b);

/// Wraps any angle in degrees to [0, 360).
double wrap_360(double deg);

/// Wraps any angle in degrees to (-180, 180].
double wrap_180(double deg);

/// Local east/north coordinates (meters) in an equirectangular plane
/// centered on `origin`. Linear in (lat, lon) for a fixed origin.
Eigen::Vector2d to_local(const GeoPoint& origin, const GeoPoint& p);
GeoPoint from_local(const GeoPoint& origin, const Eigen::Vector2d& east_north);

/// Moves `p` by the given east/north offset in meters.
GeoPoint offset(const GeoPoint& p, double east_m, double north_m);

/// Polyline with its cumulative Haversine arc-length table.
class PathPolyline {
 public:
  const std::vector<GeoPoint>& vertices() const { return vertices_; }
  const std::vector<double>& cum_s() const { return cum_s_; }
  double length() const { return cum_s_.back(); }
  std::size_t segment_count() const { return vertices_.size() - 1; }

 private:
  friend PathPolyline build_path(std::span<const GeoPoint> vertices);

  std::vector<GeoPoint> vertices_;
  std::vector<double> cum_s_;
};

/// Builds a path. Throws DegenerateInput on fewer than two vertices or on
/// repeated consecutive vertices.
PathPolyline build_path(std::span<const GeoPoint> vertices);

/// Path `a` followed by path `b`. A shared joint vertex is kept once.
PathPolyline concat_paths(const PathPolyline& a, const PathPolyline& b);

struct PathFix {
  double s = 0.0;                 ///< arc length along the path, meters
  double lateral_offset_m = 0.0;  ///< positive to the right of travel
  double heading_deg = 0.0;       ///< tangent bearing at the fix, [0, 360)
};

/// Map-matches `p` onto the closest point of `path`. Each segment is
/// projected in an equirectangular plane centered on the path vertex nearest
/// to `p`; ties between segments go to the smaller arc length.
PathFix project_onto_path(const PathPolyline& path, const GeoPoint& p);

struct PathPoint {
  GeoPoint point;
  double heading_deg = 0.0;
  bool saturated = false;  ///< requested s was past the end and got clamped
};

/// Point at arc length `s` by linear interpolation inside the containing
/// segment. Throws NegativeArcLength for s < 0; s past the end clamps.
PathPoint point_at_arc_length(const PathPolyline& path, double s);

}  // namespace pedtwin::geo
