#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "pedtwin/geodesy.hpp"
#include "pedtwin/normalization.hpp"

namespace pedtwin {

enum class AgentKind { pedestrian, vehicle };

std::string_view to_string(AgentKind kind);
AgentKind agent_kind_from_string(std::string_view s);

/// One timestamped reading of one agent.
struct SensorRecord {
  double t = 0.0;
  std::string agent_id;
  AgentKind kind = AgentKind::pedestrian;
  geo::GeoPoint pos;
  double speed_mps = 0.0;
  Eigen::Vector3d accel = Eigen::Vector3d::Zero();
  Eigen::Vector3d gyro = Eigen::Vector3d::Zero();

  friend bool operator==(const SensorRecord&, const SensorRecord&) = default;
};

/// Throws ValidationError unless speed >= 0 and every channel is finite.
void validate(const SensorRecord& r);

/// Parses one JSON Lines sensor record:
///   {"t":..,"agent_id":..,"kind":..,"lat":..,"lon":..,"speed":..,
///    "ax":..,"ay":..,"az":..,"gx":..,"gy":..,"gz":..}
SensorRecord parse_record(std::string_view line);
std::string serialize_record(const SensorRecord& r);

/// CSV with header t,agent_id,kind,lat,lon,speed,ax,ay,az,gx,gy,gz.
inline constexpr std::string_view kCsvHeader = "t,agent_id,kind,lat,lon,speed,ax,ay,az,gx,gy,gz";
SensorRecord parse_csv_record(std::string_view line);
std::string serialize_csv_record(const SensorRecord& r);

/// Reads a whole stream; the format follows the extension (.csv or JSONL).
std::vector<SensorRecord> read_stream(const std::string& path);
void write_stream(const std::string& path, std::span<const SensorRecord> records);

struct TrackSample {
  SensorRecord record;
  double cumulative_distance_m = 0.0;
  geo::PathFix fix;
};

struct TrackState {
  std::string agent_id;
  AgentKind kind = AgentKind::pedestrian;
  double sample_period_s = 0.2;
  std::vector<TrackSample> history;

  static TrackState make(std::string agent_id, AgentKind kind);
};

inline constexpr double kPedestrianPeriodS = 0.2;
inline constexpr double kVehiclePeriodS = 1.0;

/// Appends `r`, accumulating Haversine distance from the previous fix and
/// map-matching onto `path`. Throws NonMonotonicTimestamp unless r.t is
/// strictly later than the last sample.
void append_record(TrackState& track, const SensorRecord& r, const geo::PathPolyline& path);

struct DetectionZone {
  AgentKind kind = AgentKind::pedestrian;
  double s_min = 0.0;
  double s_max = 0.0;
  double half_width_m = 0.0;

  /// Validates 0 <= s_min < s_max <= path length and half_width_m > 0.
  static DetectionZone make(AgentKind kind, const geo::PathPolyline& path, double s_min, double s_max,
                            double half_width_m);
};

/// Inclusive on every boundary.
bool in_zone(const DetectionZone& zone, const geo::PathFix& fix);

struct VehicleZoneBounds {
  double final_m = 0.0;  ///< near edge: stopping sight distance plus one second of travel
  double start_m = 0.0;  ///< far edge: travel during one full crosswalk crossing
};

VehicleZoneBounds compute_vehicle_zone(double ssd_m, double speed_mps, double crossing_time_s);

struct FeatureWindow {
  Eigen::MatrixXd values;  ///< steps x 8: speed, ax, ay, az, gx, gy, gz, distance
  bool normalized = false;
};

/// Raw feature rows for the given samples, distance relative to the first row.
FeatureWindow feature_window(std::span<const TrackSample> rows);

/// Window over the last `steps` samples of `history`, min-max scaled when
/// `norm` is provided. Throws InsufficientHistory.
FeatureWindow build_feature_window(std::span<const TrackSample> history, int steps, const NormParams* norm);
FeatureWindow build_feature_window(const TrackState& track, int steps, const NormParams* norm);

/// Picks, for each grid time t_end, t_end - step, ..., the sample nearest to
/// it (earlier sample on ties), oldest first. Grid points further than half a
/// step from every sample end the series. At most `max_rows` rows.
std::vector<TrackSample> resample_history(std::span<const TrackSample> history, double step_s, double t_end,
                                          std::size_t max_rows);

/// Paired view of both agents at one twin tick. The pedestrian history is
/// resampled onto the twin step.
struct Snapshot {
  double t = 0.0;
  TrackState ped;
  TrackState veh;
};

inline constexpr double kTwinStepS = 1.0;
inline constexpr std::size_t kSnapshotRows = 16;

/// Pairs, for each agent, the latest sample with t_rec <= t + tol_s. Throws
/// NoAlignedSample when either agent has none within tol_s of t.
Snapshot snapshot_at(const TrackState& ped, const TrackState& veh, double t, double tol_s);

}  // namespace pedtwin
