#pragma once

#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "pedtwin/model.hpp"
#include "pedtwin/risk.hpp"
#include "pedtwin/sensor.hpp"
#include "pedtwin/site.hpp"

namespace pedtwin::twin {

inline constexpr int kHorizonSteps = 8;

struct GateResult {
  bool open = false;
  std::string reason;  ///< empty when open
};

/// Open iff the pedestrian is in the crosswalk zone and the vehicle is in the
/// approach zone.
GateResult gate(const Snapshot& snapshot, const Site& site);

/// The three predictors consulted every tick.
struct TwinModels {
  EncoderDecoderModel pedestrian;
  EncoderDecoderModel through;
  EncoderDecoderModel left;

  /// Throws ValidationError if a model has the wrong role.
  void check() const;
};

struct ScenarioPredictions {
  Eigen::VectorXd ped_increments;      ///< meters walked after 1..8 s
  Eigen::VectorXd through_increments;  ///< meters driven after 1..8 s, through model
  Eigen::VectorXd left_increments;     ///< meters driven after 1..8 s, left-turn model
  double ped_base_s = 0.0;             ///< pedestrian arc length on the crosswalk path
  double veh_base_s = 0.0;             ///< vehicle arc length on the approach
  int ped_direction = 1;               ///< +1 walking toward increasing s, -1 otherwise

  const Eigen::VectorXd& vehicle_increments(risk::Maneuver m) const {
    return m == risk::Maneuver::through ? through_increments : left_increments;
  }
};

/// Sign of the latest non-negligible arc-length progress; +1 if none.
int crossing_direction(const TrackState& ped);

/// Three forward passes over the snapshot windows. Throws InsufficientHistory.
ScenarioPredictions predict_scenarios(const Snapshot& snapshot, const TwinModels& models);

/// One (maneuver, step) verdict; k is 1-based.
risk::RiskAssessment assess_scenario(const ScenarioPredictions& preds, const Site& site,
                                     const risk::CrrParams& params, risk::Maneuver m, int k);

/// All 16 verdicts, through steps 1..8 followed by left-turn steps 1..8.
std::vector<risk::RiskAssessment> evaluate_scenarios(const ScenarioPredictions& preds, const Site& site,
                                                     const risk::CrrParams& params);

struct Alert {
  double t_issued = 0.0;
  risk::Maneuver maneuver = risk::Maneuver::through;
  int k = 0;
  double cre = 0.0;
  geo::GeoPoint ped_pos;
  geo::GeoPoint veh_pos;

  friend bool operator==(const Alert&, const Alert&) = default;
};

/// At most one alert per maneuver, at that maneuver's earliest crash step.
std::vector<Alert> generate_alerts(std::span<const risk::RiskAssessment> assessments, double t_issued);

struct GateSkipped {
  std::string reason;
};
struct Evaluated {
  std::vector<risk::RiskAssessment> assessments;
};
struct AlertIssued {
  std::vector<Alert> alerts;
  std::vector<risk::RiskAssessment> assessments;
};

struct TwinEvent {
  double t = 0.0;
  std::variant<GateSkipped, Evaluated, AlertIssued> body;

  bool skipped() const { return std::holds_alternative<GateSkipped>(body); }
  const std::vector<Alert>* alerts() const {
    const auto* a = std::get_if<AlertIssued>(&body);
    return a != nullptr ? &a->alerts : nullptr;
  }
};

/// One JSON line, stable field order.
std::string event_to_json(const TwinEvent& event);

struct EngineOptions {
  double align_tol_s = 0.2;
  risk::CrrParams crr = risk::CrrParams::make();
};

/// Single-writer digital twin: ingests sensor records and emits one event
/// per tick.
class TwinEngine {
 public:
  TwinEngine(Site site, TwinModels models, EngineOptions options = {});

  /// Ingests `records` and evaluates at the tick time: the latest vehicle
  /// record in the batch, or the latest record when there is none.
  const TwinEvent& step(std::span<const SensorRecord> records);

  const std::vector<TwinEvent>& events() const { return events_; }
  const Site& site() const { return site_; }
  const std::optional<TrackState>& ped_track() const { return ped_; }
  const std::optional<TrackState>& veh_track() const { return veh_; }

 private:
  TwinEvent evaluate_tick(double t, const std::string& ingest_error);
  void ingest(const SensorRecord& r);

  Site site_;
  TwinModels models_;
  EngineOptions options_;
  std::optional<TrackState> ped_;
  std::optional<TrackState> veh_;
  std::vector<TwinEvent> events_;
};

/// Drives the engine with one tick per vehicle record; pedestrian records at
/// or before the tick time join that tick.
void replay(TwinEngine& engine, std::span<const SensorRecord> ped, std::span<const SensorRecord> veh);

struct ManeuverSummary {
  int alert_count = 0;
  std::optional<int> earliest_k;
  std::optional<double> max_cre;
};

struct ReplaySummary {
  int ticks = 0;
  int skipped = 0;
  int evaluated = 0;
  ManeuverSummary through;
  ManeuverSummary left_turn;
  std::optional<Alert> first_alert;
};

ReplaySummary summarize(std::span<const TwinEvent> events);
std::string summary_to_json(const ReplaySummary& s);

/// Human-readable alert lines; consecutive alerts for the same maneuver
/// collapse into one line.
std::vector<std::string> alert_digest(std::span<const TwinEvent> events);

}  // namespace pedtwin::twin
