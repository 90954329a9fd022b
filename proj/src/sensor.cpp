#include "pedtwin/sensor.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pedtwin/errors.hpp"

namespace pedtwin {

using nlohmann::json;

std::string_view to_string(AgentKind kind) {
  return kind == AgentKind::pedestrian ? "pedestrian" : "vehicle";
}

AgentKind agent_kind_from_string(std::string_view s) {
  if (s == "pedestrian") return AgentKind::pedestrian;
  if (s == "vehicle") return AgentKind::vehicle;
  throw ValidationError("unknown agent kind '" + std::string(s) + "'");
}

void validate(const SensorRecord& r) {
  if (!std::isfinite(r.t)) throw ValidationError("non-finite timestamp");
  if (!std::isfinite(r.speed_mps)) throw ValidationError("non-finite speed");
  if (r.speed_mps < 0.0) throw ValidationError("negative speed " + std::to_string(r.speed_mps));
  if (!r.accel.allFinite() || !r.gyro.allFinite()) throw ValidationError("non-finite inertial channel");
  if (r.agent_id.empty()) throw ValidationError("empty agent_id");
}

namespace {

double number_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'");
  if (!it->is_number()) throw ParseError(std::string("field '") + key + "' is not a number");
  return it->get<double>();
}

std::string string_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string("missing field '") + key + "'");
  if (!it->is_string()) throw ParseError(std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

SensorRecord make_record(double t, std::string agent_id, AgentKind kind, double lat, double lon, double speed,
                         const Eigen::Vector3d& accel, const Eigen::Vector3d& gyro) {
  SensorRecord r;
  r.t = t;
  r.agent_id = std::move(agent_id);
  r.kind = kind;
  r.pos = geo::GeoPoint(lat, lon);
  r.speed_mps = speed;
  r.accel = accel;
  r.gyro = gyro;
  validate(r);
  return r;
}

std::string format_double(double x) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view s) {
  double x = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ParseError("bad number '" + std::string(s) + "'");
  }
  return x;
}

bool ends_with(const std::string& s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

SensorRecord parse_record(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("record is not a JSON object");
  const double t = number_field(j, "t");
  std::string agent_id = string_field(j, "agent_id");
  const AgentKind kind = agent_kind_from_string(string_field(j, "kind"));
  const double lat = number_field(j, "lat");
  const double lon = number_field(j, "lon");
  const double speed = number_field(j, "speed");
  const Eigen::Vector3d accel(number_field(j, "ax"), number_field(j, "ay"), number_field(j, "az"));
  const Eigen::Vector3d gyro(number_field(j, "gx"), number_field(j, "gy"), number_field(j, "gz"));
  return make_record(t, std::move(agent_id), kind, lat, lon, speed, accel, gyro);
}

std::string serialize_record(const SensorRecord& r) {
  nlohmann::ordered_json j;
  j["t"] = r.t;
  j["agent_id"] = r.agent_id;
  j["kind"] = to_string(r.kind);
  j["lat"] = r.pos.lat_deg();
  j["lon"] = r.pos.lon_deg();
  j["speed"] = r.speed_mps;
  j["ax"] = r.accel.x();
  j["ay"] = r.accel.y();
  j["az"] = r.accel.z();
  j["gx"] = r.gyro.x();
  j["gy"] = r.gyro.y();
  j["gz"] = r.gyro.z();
  return j.dump();
}

SensorRecord parse_csv_record(std::string_view line) {
  std::vector<std::string_view> f;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    f.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (f.size() != 12) throw ParseError("expected 12 CSV fields, got " + std::to_string(f.size()));
  return make_record(parse_double(f[0]), std::string(f[1]), agent_kind_from_string(f[2]), parse_double(f[3]),
                     parse_double(f[4]), parse_double(f[5]),
                     {parse_double(f[6]), parse_double(f[7]), parse_double(f[8])},
                     {parse_double(f[9]), parse_double(f[10]), parse_double(f[11])});
}

std::string serialize_csv_record(const SensorRecord& r) {
  std::string out = format_double(r.t) + ',' + r.agent_id + ',' + std::string(to_string(r.kind));
  for (double x : {r.pos.lat_deg(), r.pos.lon_deg(), r.speed_mps, r.accel.x(), r.accel.y(), r.accel.z(), r.gyro.x(),
                   r.gyro.y(), r.gyro.z()}) {
    out += ',';
    out += format_double(x);
  }
  return out;
}

std::vector<SensorRecord> read_stream(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  const bool csv = ends_with(path, ".csv");
  std::vector<SensorRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (csv && lineno == 1) {
      if (line != kCsvHeader) throw ParseError(path + ": unexpected CSV header");
      continue;
    }
    const std::string where = path + ":" + std::to_string(lineno) + ": ";
    try {
      out.push_back(csv ? parse_csv_record(line) : parse_record(line));
    } catch (const ParseError& e) {
      throw ParseError(where + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(where + e.what());
    }
  }
  return out;
}

void write_stream(const std::string& path, std::span<const SensorRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  const bool csv = ends_with(path, ".csv");
  if (csv) out << kCsvHeader << '\n';
  for (const auto& r : records) out << (csv ? serialize_csv_record(r) : serialize_record(r)) << '\n';
  if (!out) throw IoError("write failed for " + path);
}

TrackState TrackState::make(std::string agent_id, AgentKind kind) {
  TrackState t;
  t.agent_id = std::move(agent_id);
  t.kind = kind;
  t.sample_period_s = kind == AgentKind::pedestrian ? kPedestrianPeriodS : kVehiclePeriodS;
  return t;
}

void append_record(TrackState& track, const SensorRecord& r, const geo::PathPolyline& path) {
  if (r.kind != track.kind) throw ValidationError("record kind does not match track kind");
  TrackSample sample{r, 0.0, geo::project_onto_path(path, r.pos)};
  if (!track.history.empty()) {
    const TrackSample& last = track.history.back();
    if (!(r.t > last.record.t)) {
      throw NonMonotonicTimestamp("timestamp " + std::to_string(r.t) + " not after " +
                                  std::to_string(last.record.t));
    }
    sample.cumulative_distance_m = last.cumulative_distance_m + geo::haversine_distance(last.record.pos, r.pos);
  }
  track.history.push_back(std::move(sample));
}

DetectionZone DetectionZone::make(AgentKind kind, const geo::PathPolyline& path, double s_min, double s_max,
                                  double half_width_m) {
  if (!(s_min >= 0.0 && s_min < s_max && s_max <= path.length())) {
    throw InvalidZone("zone bounds [" + std::to_string(s_min) + ", " + std::to_string(s_max) +
                      "] not inside path of length " + std::to_string(path.length()));
  }
  if (!(half_width_m > 0.0)) throw InvalidZone("zone half width must be positive");
  return {kind, s_min, s_max, half_width_m};
}

bool in_zone(const DetectionZone& zone, const geo::PathFix& fix) {
  return fix.s >= zone.s_min && fix.s <= zone.s_max && std::abs(fix.lateral_offset_m) <= zone.half_width_m;
}

VehicleZoneBounds compute_vehicle_zone(double ssd_m, double speed_mps, double crossing_time_s) {
  if (!(ssd_m > 0.0) || !(speed_mps > 0.0) || !(crossing_time_s > 0.0)) {
    throw InvalidZone("vehicle zone inputs must be positive");
  }
  // The vehicle reports once per second, so the near edge adds one report
  // interval of travel to the stopping sight distance.
  const VehicleZoneBounds b{ssd_m + speed_mps * 1.0, speed_mps * crossing_time_s};
  if (!(b.start_m > b.final_m)) {
    throw InvalidZone("start distance " + std::to_string(b.start_m) + " does not exceed final distance " +
                      std::to_string(b.final_m));
  }
  return b;
}

FeatureWindow feature_window(std::span<const TrackSample> rows) {
  FeatureWindow w;
  w.values.resize(static_cast<Eigen::Index>(rows.size()), kFeatureCount);
  if (rows.empty()) return w;
  const double d0 = rows.front().cumulative_distance_m;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i].record;
    const auto row = static_cast<Eigen::Index>(i);
    w.values(row, 0) = r.speed_mps;
    w.values.block<1, 3>(row, 1) = r.accel.transpose();
    w.values.block<1, 3>(row, 4) = r.gyro.transpose();
    w.values(row, 7) = rows[i].cumulative_distance_m - d0;
  }
  return w;
}

FeatureWindow build_feature_window(std::span<const TrackSample> history, int steps, const NormParams* norm) {
  if (steps <= 0) throw ShapeMismatch("window steps must be positive");
  const auto n = static_cast<std::size_t>(steps);
  if (history.size() < n) {
    throw InsufficientHistory("need " + std::to_string(n) + " samples, have " + std::to_string(history.size()));
  }
  FeatureWindow w = feature_window(history.subspan(history.size() - n));
  if (norm != nullptr) {
    w.values = norm->normalize_inputs(w.values);
    w.normalized = true;
  }
  return w;
}

FeatureWindow build_feature_window(const TrackState& track, int steps, const NormParams* norm) {
  return build_feature_window(std::span<const TrackSample>(track.history), steps, norm);
}

std::vector<TrackSample> resample_history(std::span<const TrackSample> history, double step_s, double t_end,
                                          std::size_t max_rows) {
  std::vector<TrackSample> out;
  if (history.empty()) return out;
  const double half = 0.5 * step_s + 1e-9;
  std::size_t prev_index = history.size();
  for (std::size_t j = 0; j < max_rows; ++j) {
    const double target = t_end - static_cast<double>(j) * step_s;
    auto it = std::lower_bound(history.begin(), history.end(), target,
                               [](const TrackSample& s, double t) { return s.record.t < t; });
    std::size_t best = history.size();
    double best_gap = std::numeric_limits<double>::infinity();
    if (it != history.begin()) {
      const auto k = static_cast<std::size_t>(std::distance(history.begin(), it)) - 1;
      best = k;
      best_gap = target - history[k].record.t;
    }
    if (it != history.end()) {
      const auto k = static_cast<std::size_t>(std::distance(history.begin(), it));
      const double gap = history[k].record.t - target;
      if (gap < best_gap) {
        best = k;
        best_gap = gap;
      }
    }
    if (best == history.size() || best_gap > half || best == prev_index) break;
    out.push_back(history[best]);
    prev_index = best;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

namespace {

// Index one past the aligned sample, or throws.
std::size_t aligned_end(const TrackState& track, double t, double tol_s) {
  const auto& h = track.history;
  auto it = std::upper_bound(h.begin(), h.end(), t + tol_s,
                             [](double v, const TrackSample& s) { return v < s.record.t; });
  if (it == h.begin() || std::abs(std::prev(it)->record.t - t) > tol_s) {
    throw NoAlignedSample("no " + std::string(to_string(track.kind)) + " sample within " + std::to_string(tol_s) +
                          " s of t=" + std::to_string(t));
  }
  return static_cast<std::size_t>(std::distance(h.begin(), it));
}

}  // namespace

Snapshot snapshot_at(const TrackState& ped, const TrackState& veh, double t, double tol_s) {
  const std::size_t ped_end = aligned_end(ped, t, tol_s);
  const std::size_t veh_end = aligned_end(veh, t, tol_s);

  Snapshot snap;
  snap.t = t;
  snap.ped = TrackState::make(ped.agent_id, ped.kind);
  snap.ped.sample_period_s = kTwinStepS;
  snap.ped.history = resample_history(std::span<const TrackSample>(ped.history.data(), ped_end), kTwinStepS, t,
                                      kSnapshotRows);
  snap.veh = TrackState::make(veh.agent_id, veh.kind);
  const std::size_t first = veh_end > kSnapshotRows ? veh_end - kSnapshotRows : 0;
  snap.veh.history.assign(veh.history.begin() + static_cast<std::ptrdiff_t>(first),
                          veh.history.begin() + static_cast<std::ptrdiff_t>(veh_end));
  return snap;
}

}  // namespace pedtwin
