#include "pedtwin/scenario_gen.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include "pedtwin/errors.hpp"

namespace pedtwin::gen {

namespace {

constexpr double kGravity = 9.80665;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Noise {
 public:
  explicit Noise(std::uint64_t seed) : rng_(seed) {}
  double gauss(double sigma) {
    if (sigma <= 0.0) return 0.0;
    return std::normal_distribution<double>(0.0, sigma)(rng_);
  }
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }

 private:
  std::mt19937_64 rng_;
};

}  // namespace

void GenConfig::validate() const {
  if (ped_speed_mps < 0.0 || veh_speed_mps < 0.0) throw ValidationError("speeds must be non-negative");
  if (speed_noise_sigma < 0.0 || position_noise_sigma_m < 0.0 || imu_noise_sigma < 0.0 || speed_spread < 0.0) {
    throw ValidationError("noise levels must be non-negative");
  }
  if (speed_spread >= 1.0) throw ValidationError("speed spread must be below 1");
  if (!(ped_rate_hz > 0.0) || !(veh_rate_hz > 0.0)) throw ValidationError("sample rates must be positive");
  if (!(duration_s > 0.0)) throw ValidationError("duration must be positive");
}

SiteSpec make_site_spec(const GenConfig& config) {
  config.validate();
  const SiteLayout& L = config.layout;
  const geo::GeoPoint origin(L.origin_lat, L.origin_lon);
  auto at = [&](double east, double north) { return geo::offset(origin, east, north); };

  SiteSpec s;
  const double y_end = L.approach_length_m;
  const double y_cw = y_end - L.crosswalk_setback_m;
  s.approach = {at(0.0, 0.0), at(0.0, y_end)};
  s.through = {at(0.0, y_end), at(0.0, y_end + L.through_length_m)};

  // Quarter circle to the west, centered turn_radius_m left of the approach end.
  s.left_turn.push_back(at(0.0, y_end));
  for (int i = 1; i <= L.turn_segments; ++i) {
    const double a = 0.5 * std::numbers::pi * i / L.turn_segments;
    s.left_turn.push_back(at(-L.turn_radius_m + L.turn_radius_m * std::cos(a), y_end + L.turn_radius_m * std::sin(a)));
  }
  s.left_turn.push_back(at(-L.turn_radius_m - L.exit_length_m, y_end + L.turn_radius_m));

  const double x_start = -L.conflict_along_crosswalk_m;
  const double x_end = x_start + L.crosswalk_length_m;
  s.crosswalk = {at(x_start - L.sidewalk_m, y_cw), at(x_start, y_cw), at(x_end, y_cw), at(x_end + L.sidewalk_m, y_cw)};
  s.crosswalk_s_min = L.sidewalk_m;
  s.crosswalk_s_max = L.sidewalk_m + L.crosswalk_length_m;
  s.crosswalk_width_m = L.crosswalk_width_m;
  s.lane_half_width_m = L.lane_half_width_m;
  s.speed_limit_mps = config.veh_speed_mps > 0.0 ? config.veh_speed_mps : L.speed_limit_mps;
  s.ssd_m = L.ssd_m;
  s.crossing_time_s = L.crosswalk_length_m / (config.ped_speed_mps > 0.0 ? config.ped_speed_mps : 1.4);
  return s;
}

Site make_site(const GenConfig& config) { return build_site(make_site_spec(config)); }

const geo::PathPolyline& agent_path(const Site& site, AgentKind kind, risk::Maneuver maneuver) {
  return kind == AgentKind::pedestrian ? site.crosswalk : site.maneuver_path(maneuver);
}

RunSpeeds run_speeds(const GenConfig& config) {
  Noise rng(splitmix64(config.seed ^ 0x5eedULL));
  const double fp = 1.0 + config.speed_spread * rng.uniform(-1.0, 1.0);
  const double fv = 1.0 + config.speed_spread * rng.uniform(-1.0, 1.0);
  return {config.ped_speed_mps * fp, config.veh_speed_mps * fv};
}

Trajectory gen_trajectory(const Site& site, const GenConfig& config, AgentKind kind) {
  config.validate();
  const bool ped = kind == AgentKind::pedestrian;
  const geo::PathPolyline& path = agent_path(site, kind, config.maneuver);
  const RunSpeeds speeds = run_speeds(config);

  Trajectory traj;
  traj.kind = kind;
  traj.maneuver = config.maneuver;
  traj.plan = {config.t0_s, ped ? config.ped_start_s : config.veh_start_s, ped ? speeds.ped : speeds.veh};
  const double rate = ped ? config.ped_rate_hz : config.veh_rate_hz;
  const double dt = 1.0 / rate;
  const std::string id = ped ? "ped-1" : "veh-1";
  Noise noise(splitmix64(config.seed * 2 + (ped ? 0 : 1)));

  auto heading_at = [&](double t) {
    const double s = std::clamp(traj.plan.arc_at(t), 0.0, path.length());
    return geo::point_at_arc_length(path, s).heading_deg;
  };

  const auto n = static_cast<long>(std::floor(config.duration_s * rate + 1e-9));
  for (long i = 1; i <= n; ++i) {
    const double t = config.t0_s + static_cast<double>(i) * dt;
    const double s = traj.plan.arc_at(t);
    if (s > path.length() + 1e-9) break;
    const auto pt = geo::point_at_arc_length(path, std::max(0.0, s));

    // Compass heading grows clockwise; yaw rate is counter-clockwise positive.
    const double dheading = geo::wrap_180(heading_at(t + dt) - heading_at(t - dt));
    const double yaw_rate = -dheading * std::numbers::pi / 180.0 / (2.0 * dt);
    const double v = traj.plan.speed;

    SensorRecord r;
    r.t = t;
    r.agent_id = id;
    r.kind = kind;
    const double east_err = noise.gauss(config.position_noise_sigma_m);
    const double north_err = noise.gauss(config.position_noise_sigma_m);
    r.pos = geo::offset(pt.point, east_err, north_err);
    r.speed_mps = std::max(0.0, v + noise.gauss(config.speed_noise_sigma));
    r.accel = {noise.gauss(config.imu_noise_sigma), v * yaw_rate + noise.gauss(config.imu_noise_sigma),
               kGravity + noise.gauss(config.imu_noise_sigma)};
    r.gyro = {noise.gauss(config.imu_noise_sigma), noise.gauss(config.imu_noise_sigma),
              yaw_rate + noise.gauss(config.imu_noise_sigma)};
    traj.records.push_back(std::move(r));
    traj.truth.push_back({t, id, s});
  }
  return traj;
}

Dataset windows_from_run(std::span<const TrackSample> samples, std::span<const double> arcs, int input_steps,
                         int output_steps) {
  if (samples.size() != arcs.size()) throw LengthMismatch("samples and arcs differ in length");
  Dataset d;
  const auto n = static_cast<long>(samples.size());
  for (long i = 0; i + input_steps + output_steps <= n; ++i) {
    d.windows.push_back(feature_window(samples.subspan(static_cast<std::size_t>(i), static_cast<std::size_t>(input_steps))));
    const auto last = static_cast<std::size_t>(i + input_steps - 1);
    Eigen::VectorXd target(output_steps);
    for (int k = 1; k <= output_steps; ++k) target[k - 1] = arcs[last + static_cast<std::size_t>(k)] - arcs[last];
    d.targets.push_back(std::move(target));
  }
  return d;
}

Dataset gen_dataset(const Site& site, const GenConfig& config, int n_runs, Role role, double ped_step_s) {
  if (n_runs < 1) throw ValidationError("n_runs must be at least 1");
  const bool ped = role == Role::pedestrian;
  const AgentKind kind = ped ? AgentKind::pedestrian : AgentKind::vehicle;
  const int in_steps = input_steps_for(role);
  constexpr int kOutSteps = 8;

  Dataset all;
  for (int r = 0; r < n_runs; ++r) {
    GenConfig run = config;
    run.seed = splitmix64(config.seed + static_cast<std::uint64_t>(r));
    run.maneuver = role == Role::vehicle_left ? risk::Maneuver::left_turn : risk::Maneuver::through;
    const RunSpeeds speeds = run_speeds(run);
    const double v = ped ? speeds.ped : speeds.veh;
    const double start = ped ? run.ped_start_s : run.veh_start_s;
    if (v > 0.0) run.duration_s = (agent_path(site, kind, run.maneuver).length() - start) / v;
    const Trajectory traj = gen_trajectory(site, run, kind);

    TrackState track = TrackState::make(traj.records.empty() ? "x" : traj.records.front().agent_id, kind);
    for (const auto& rec : traj.records) append_record(track, rec, agent_path(site, kind, run.maneuver));

    std::vector<TrackSample> samples = track.history;
    if (ped && ped_step_s > 0.0 && !samples.empty()) {
      const double t_last = samples.back().record.t;
      const double t_end = run.t0_s + std::floor((t_last - run.t0_s) / ped_step_s + 1e-9) * ped_step_s;
      samples = resample_history(track.history, ped_step_s, t_end, track.history.size());
    }
    std::vector<double> arcs;
    arcs.reserve(samples.size());
    for (const auto& s : samples) arcs.push_back(traj.plan.arc_at(s.record.t));
    all.append(windows_from_run(samples, arcs, in_steps, kOutSteps));
  }
  return all;
}

Encounter gen_encounter(const Site& site, const GenConfig& config, bool collide) {
  config.validate();
  const RunSpeeds speeds = run_speeds(config);
  if (!(speeds.ped > 0.0)) throw Infeasible("pedestrian never reaches the conflict point");
  if (!(speeds.veh > 0.0)) throw Infeasible("vehicle never reaches the conflict point");
  if (config.ped_start_s >= site.conflict_s_crosswalk) throw Infeasible("pedestrian starts past the conflict point");

  const double t_ped = config.t0_s + (site.conflict_s_crosswalk - config.ped_start_s) / speeds.ped;
  if (t_ped > config.t0_s + config.duration_s) throw Infeasible("pedestrian reaches the conflict point too late");

  double t_veh = t_ped;
  if (!collide) {
    Noise rng(splitmix64(config.seed ^ 0xc011ULL));
    // Vehicle first by >= 2.5 s, or pedestrian first by >= 5 s: clear of the
    // risk sector at every whole-second step in both orders.
    const bool vehicle_first = rng.uniform(0.0, 1.0) < 0.5;
    t_veh = vehicle_first ? t_ped - rng.uniform(2.5, 4.0) : t_ped + rng.uniform(5.0, 7.0);
  }

  GenConfig ped_cfg = config;
  ped_cfg.duration_s = config.duration_s;
  Encounter e;
  e.collide = collide;
  e.ped_conflict_t = t_ped;
  e.veh_conflict_t = t_veh;
  e.ped = gen_trajectory(site, ped_cfg, AgentKind::pedestrian);

  // Vehicle clock starts on a whole second with the vehicle at or after the
  // approach start.
  GenConfig veh_cfg = config;
  veh_cfg.t0_s = std::ceil(t_veh - site.conflict_s_approach / speeds.veh);
  veh_cfg.veh_start_s = site.conflict_s_approach - speeds.veh * (t_veh - veh_cfg.t0_s);
  veh_cfg.duration_s = std::ceil(t_veh + 10.0 - veh_cfg.t0_s);
  e.veh = gen_trajectory(site, veh_cfg, AgentKind::vehicle);
  return e;
}

void write_ground_truth(const std::string& path, std::span<const GroundTruth> truth) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "t,agent_id,arc_length_m\n";
  char buf[96];
  for (const auto& g : truth) {
    std::snprintf(buf, sizeof buf, "%.17g,%s,%.17g\n", g.t, g.agent_id.c_str(), g.arc_length_m);
    out << buf;
  }
}

}  // namespace pedtwin::gen
