#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "pedtwin/model.hpp"
#include "pedtwin/risk.hpp"
#include "pedtwin/sensor.hpp"
#include "pedtwin/site.hpp"
#include "pedtwin/training.hpp"

namespace pedtwin::gen {

/// Geometry of the synthetic intersection, in meters. The approach runs due
/// north from `origin`; the crosswalk crosses it perpendicularly.
struct SiteLayout {
  double origin_lat = 33.2140;
  double origin_lon = -87.5450;
  double approach_length_m = 350.0;
  double crosswalk_setback_m = 20.0;  ///< crosswalk distance before the approach end
  double crosswalk_length_m = 21.0;
  double conflict_along_crosswalk_m = 14.0;  ///< where the lane centerline crosses
  double sidewalk_m = 5.6;                   ///< pedestrian path before/after the crosswalk
  double crosswalk_width_m = 3.0;
  double lane_half_width_m = 5.0;
  double through_length_m = 100.0;
  double turn_radius_m = 15.0;
  int turn_segments = 16;
  double exit_length_m = 80.0;
  double speed_limit_mps = 11.176;
  double ssd_m = 47.24;
};

struct GenConfig {
  std::uint64_t seed = 1;
  double ped_speed_mps = 1.4;
  double veh_speed_mps = 11.176;
  double speed_spread = 0.0;  ///< per-run relative variation of the nominal speeds
  double speed_noise_sigma = 0.0;
  double position_noise_sigma_m = 0.0;
  double imu_noise_sigma = 0.0;
  risk::Maneuver maneuver = risk::Maneuver::through;
  double ped_start_s = 0.0;
  double veh_start_s = 0.0;
  double t0_s = 0.0;
  double duration_s = 60.0;
  double ped_rate_hz = 5.0;
  double veh_rate_hz = 1.0;
  SiteLayout layout;

  /// Throws ValidationError on negative speeds/sigmas or non-positive rates.
  void validate() const;
};

SiteSpec make_site_spec(const GenConfig& config);
Site make_site(const GenConfig& config);

/// Constant-speed motion along a path: s(t) = s0 + speed * (t - t0).
struct KinematicPlan {
  double t0 = 0.0;
  double s0 = 0.0;
  double speed = 0.0;

  double arc_at(double t) const { return s0 + speed * (t - t0); }
};

struct GroundTruth {
  double t = 0.0;
  std::string agent_id;
  double arc_length_m = 0.0;
};

struct Trajectory {
  AgentKind kind = AgentKind::pedestrian;
  risk::Maneuver maneuver = risk::Maneuver::through;
  KinematicPlan plan;
  std::vector<SensorRecord> records;
  std::vector<GroundTruth> truth;  ///< one per record
};

/// Path an agent of `kind` follows under `maneuver`.
const geo::PathPolyline& agent_path(const Site& site, AgentKind kind, risk::Maneuver maneuver);

/// Nominal speeds for one run after applying the per-run spread.
struct RunSpeeds {
  double ped = 0.0;
  double veh = 0.0;
};
RunSpeeds run_speeds(const GenConfig& config);

/// Records at t0 + i / rate, i = 1, 2, ..., while t <= t0 + duration and the
/// agent is still on its path.
Trajectory gen_trajectory(const Site& site, const GenConfig& config, AgentKind kind);

/// Sliding windows (stride 1) over samples with ground-truth arcs; the k-th
/// target is arc[i + in - 1 + k] - arc[i + in - 1].
Dataset windows_from_run(std::span<const TrackSample> samples, std::span<const double> arcs, int input_steps,
                         int output_steps);

/// Training pairs for `role` from `n_runs` seeded runs. Pedestrian runs are
/// resampled to `ped_step_s` (0 keeps the native rate).
Dataset gen_dataset(const Site& site, const GenConfig& config, int n_runs, Role role, double ped_step_s = 1.0);

struct Encounter {
  Trajectory ped;
  Trajectory veh;
  double ped_conflict_t = 0.0;
  double veh_conflict_t = 0.0;
  bool collide = false;
};

/// Pedestrian and vehicle streams timed so both reach the conflict point
/// together (collide) or well apart. Throws Infeasible.
Encounter gen_encounter(const Site& site, const GenConfig& config, bool collide);

void write_ground_truth(const std::string& path, std::span<const GroundTruth> truth);

}  // namespace pedtwin::gen
