#include "pedtwin/twin_engine.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include <json.hpp>

#include "pedtwin/errors.hpp"

namespace pedtwin::twin {

using nlohmann::ordered_json;
using risk::Maneuver;

GateResult gate(const Snapshot& snapshot, const Site& site) {
  if (snapshot.ped.history.empty() || !in_zone(site.ped_zone, snapshot.ped.history.back().fix)) {
    return {false, "no pedestrian in zone"};
  }
  if (snapshot.veh.history.empty() || !in_zone(site.veh_zone, snapshot.veh.history.back().fix)) {
    return {false, "no vehicle in zone"};
  }
  return {true, {}};
}

void TwinModels::check() const {
  if (pedestrian.role != Role::pedestrian || through.role != Role::vehicle_through ||
      left.role != Role::vehicle_left) {
    throw ValidationError("twin needs pedestrian, vehicle_through and vehicle_left models");
  }
  if (pedestrian.config.output_steps != kHorizonSteps || through.config.output_steps != kHorizonSteps ||
      left.config.output_steps != kHorizonSteps) {
    throw ValidationError("twin models must predict 8 steps");
  }
}

int crossing_direction(const TrackState& ped) {
  const auto& h = ped.history;
  for (std::size_t i = h.size(); i-- > 1;) {
    const double ds = h[i].fix.s - h[i - 1].fix.s;
    if (std::abs(ds) > 1e-3) return ds > 0.0 ? 1 : -1;
  }
  return 1;
}

ScenarioPredictions predict_scenarios(const Snapshot& snapshot, const TwinModels& models) {
  const auto ped_window =
      build_feature_window(snapshot.ped, models.pedestrian.config.input_steps, &models.pedestrian.norm);
  const auto through_window = build_feature_window(snapshot.veh, models.through.config.input_steps, &models.through.norm);
  const auto left_window = build_feature_window(snapshot.veh, models.left.config.input_steps, &models.left.norm);

  ScenarioPredictions p;
  p.ped_increments = forward(models.pedestrian, ped_window);
  p.through_increments = forward(models.through, through_window);
  p.left_increments = forward(models.left, left_window);
  p.ped_base_s = snapshot.ped.history.back().fix.s;
  p.veh_base_s = snapshot.veh.history.back().fix.s;
  p.ped_direction = crossing_direction(snapshot.ped);
  return p;
}

risk::RiskAssessment assess_scenario(const ScenarioPredictions& preds, const Site& site,
                                     const risk::CrrParams& params, Maneuver m, int k) {
  const auto idx = static_cast<Eigen::Index>(k - 1);
  const double ped_s = std::max(0.0, preds.ped_base_s + preds.ped_direction * preds.ped_increments[idx]);
  const double veh_s = std::max(0.0, preds.veh_base_s + preds.vehicle_increments(m)[idx]);
  const auto ped = geo::point_at_arc_length(site.crosswalk, ped_s);
  const auto veh = geo::point_at_arc_length(site.maneuver_path(m), veh_s);
  return risk::assess_step(k, m, {veh.point, veh.heading_deg}, ped.point, params);
}

std::vector<risk::RiskAssessment> evaluate_scenarios(const ScenarioPredictions& preds, const Site& site,
                                                     const risk::CrrParams& params) {
  for (const auto* v : {&preds.ped_increments, &preds.through_increments, &preds.left_increments}) {
    if (v->size() != kHorizonSteps || !v->allFinite()) throw ValidationError("predictions must be 8 finite values");
  }
  std::vector<risk::RiskAssessment> out;
  out.reserve(2 * kHorizonSteps);
  for (Maneuver m : {Maneuver::through, Maneuver::left_turn}) {
    for (int k = 1; k <= kHorizonSteps; ++k) out.push_back(assess_scenario(preds, site, params, m, k));
  }
  return out;
}

std::vector<Alert> generate_alerts(std::span<const risk::RiskAssessment> assessments, double t_issued) {
  std::vector<Alert> alerts;
  for (Maneuver m : {Maneuver::through, Maneuver::left_turn}) {
    const risk::RiskAssessment* earliest = nullptr;
    for (const auto& a : assessments) {
      if (a.maneuver == m && a.is_crash && (earliest == nullptr || a.step_k < earliest->step_k)) earliest = &a;
    }
    if (earliest != nullptr) {
      alerts.push_back({t_issued, m, earliest->step_k, earliest->cre, earliest->ped_pos, earliest->veh_pos});
    }
  }
  return alerts;
}

namespace {

ordered_json cre_json(double cre) { return std::isfinite(cre) ? ordered_json(cre) : ordered_json("inf"); }

ordered_json assessment_json(const risk::RiskAssessment& a) {
  ordered_json j;
  j["maneuver"] = risk::to_string(a.maneuver);
  j["k"] = a.step_k;
  j["distance_m"] = a.geometry.distance_m;
  j["angle_deg"] = a.geometry.bearing_offset_deg;
  j["in_crr"] = a.in_crr;
  j["cre"] = cre_json(a.cre);
  j["crash"] = a.is_crash;
  return j;
}

ordered_json alert_json(const Alert& a) {
  ordered_json j;
  j["t"] = a.t_issued;
  j["maneuver"] = risk::to_string(a.maneuver);
  j["k"] = a.k;
  j["cre"] = cre_json(a.cre);
  j["ped_lat"] = a.ped_pos.lat_deg();
  j["ped_lon"] = a.ped_pos.lon_deg();
  j["veh_lat"] = a.veh_pos.lat_deg();
  j["veh_lon"] = a.veh_pos.lon_deg();
  return j;
}

ordered_json assessments_json(const std::vector<risk::RiskAssessment>& v) {
  ordered_json arr = ordered_json::array();
  for (const auto& a : v) arr.push_back(assessment_json(a));
  return arr;
}

}  // namespace

std::string event_to_json(const TwinEvent& event) {
  ordered_json j;
  j["t"] = event.t;
  std::visit(
      [&j](const auto& body) {
        using T = std::decay_t<decltype(body)>;
        if constexpr (std::is_same_v<T, GateSkipped>) {
          j["event"] = "gate_skipped";
          j["reason"] = body.reason;
        } else if constexpr (std::is_same_v<T, Evaluated>) {
          j["event"] = "evaluated";
          j["assessments"] = assessments_json(body.assessments);
        } else {
          j["event"] = "alert_issued";
          ordered_json alerts = ordered_json::array();
          for (const auto& a : body.alerts) alerts.push_back(alert_json(a));
          j["alerts"] = std::move(alerts);
          j["assessments"] = assessments_json(body.assessments);
        }
      },
      event.body);
  return j.dump();
}

TwinEngine::TwinEngine(Site site, TwinModels models, EngineOptions options)
    : site_(std::move(site)), models_(std::move(models)), options_(options) {
  models_.check();
}

void TwinEngine::ingest(const SensorRecord& r) {
  auto& slot = r.kind == AgentKind::pedestrian ? ped_ : veh_;
  if (!slot) slot = TrackState::make(r.agent_id, r.kind);
  if (slot->agent_id != r.agent_id) {
    throw ValidationError("second " + std::string(to_string(r.kind)) + " '" + r.agent_id + "' not supported");
  }
  append_record(*slot, r, r.kind == AgentKind::pedestrian ? site_.crosswalk : site_.approach);
}

const TwinEvent& TwinEngine::step(std::span<const SensorRecord> records) {
  std::vector<SensorRecord> batch(records.begin(), records.end());
  std::stable_sort(batch.begin(), batch.end(), [](const auto& a, const auto& b) { return a.t < b.t; });

  std::string ingest_error;
  for (const auto& r : batch) {
    try {
      ingest(r);
    } catch (const Error& e) {
      if (ingest_error.empty()) ingest_error = std::string("ingest error: ") + e.what();
    }
  }

  double t = 0.0;
  bool have_vehicle = false;
  for (const auto& r : batch) {
    if (r.kind == AgentKind::vehicle) {
      t = have_vehicle ? std::max(t, r.t) : r.t;
      have_vehicle = true;
    }
  }
  if (!have_vehicle) {
    if (!batch.empty()) {
      t = batch.back().t;
    } else if (!events_.empty()) {
      t = events_.back().t;
    }
  }
  events_.push_back(evaluate_tick(t, ingest_error));
  return events_.back();
}

TwinEvent TwinEngine::evaluate_tick(double t, const std::string& ingest_error) {
  if (!ingest_error.empty()) return {t, GateSkipped{ingest_error}};
  if (!ped_ || ped_->history.empty()) return {t, GateSkipped{"no pedestrian data"}};
  if (!veh_ || veh_->history.empty()) return {t, GateSkipped{"no vehicle data"}};

  Snapshot snap;
  try {
    snap = snapshot_at(*ped_, *veh_, t, options_.align_tol_s);
  } catch (const NoAlignedSample& e) {
    return {t, GateSkipped{std::string("no aligned sample: ") + e.what()}};
  }
  const GateResult g = gate(snap, site_);
  if (!g.open) return {t, GateSkipped{g.reason}};

  ScenarioPredictions preds;
  try {
    preds = predict_scenarios(snap, models_);
  } catch (const InsufficientHistory& e) {
    return {t, GateSkipped{std::string("insufficient history: ") + e.what()}};
  }
  auto assessments = evaluate_scenarios(preds, site_, options_.crr);
  auto alerts = generate_alerts(assessments, t);
  if (alerts.empty()) return {t, Evaluated{std::move(assessments)}};
  return {t, AlertIssued{std::move(alerts), std::move(assessments)}};
}

void replay(TwinEngine& engine, std::span<const SensorRecord> ped, std::span<const SensorRecord> veh) {
  std::vector<SensorRecord> peds(ped.begin(), ped.end());
  std::stable_sort(peds.begin(), peds.end(), [](const auto& a, const auto& b) { return a.t < b.t; });
  std::vector<SensorRecord> vehs(veh.begin(), veh.end());
  std::stable_sort(vehs.begin(), vehs.end(), [](const auto& a, const auto& b) { return a.t < b.t; });

  std::size_t next_ped = 0;
  std::vector<SensorRecord> batch;
  for (const auto& v : vehs) {
    batch.clear();
    while (next_ped < peds.size() && peds[next_ped].t <= v.t + 1e-9) batch.push_back(peds[next_ped++]);
    batch.push_back(v);
    engine.step(batch);
  }
}

ReplaySummary summarize(std::span<const TwinEvent> events) {
  ReplaySummary s;
  for (const auto& e : events) {
    ++s.ticks;
    if (e.skipped()) {
      ++s.skipped;
      continue;
    }
    ++s.evaluated;
    if (const auto* alerts = e.alerts()) {
      for (const auto& a : *alerts) {
        if (!s.first_alert) s.first_alert = a;
        ManeuverSummary& m = a.maneuver == Maneuver::through ? s.through : s.left_turn;
        ++m.alert_count;
        m.earliest_k = m.earliest_k ? std::min(*m.earliest_k, a.k) : a.k;
        m.max_cre = m.max_cre ? std::max(*m.max_cre, a.cre) : a.cre;
      }
    }
  }
  return s;
}

std::string summary_to_json(const ReplaySummary& s) {
  auto maneuver = [](const ManeuverSummary& m) {
    ordered_json j;
    j["alert_count"] = m.alert_count;
    j["earliest_k"] = m.earliest_k ? ordered_json(*m.earliest_k) : ordered_json(nullptr);
    j["max_cre"] = m.max_cre ? cre_json(*m.max_cre) : ordered_json(nullptr);
    return j;
  };
  ordered_json j;
  j["ticks"] = s.ticks;
  j["skipped"] = s.skipped;
  j["evaluated"] = s.evaluated;
  j["alerts_total"] = s.through.alert_count + s.left_turn.alert_count;
  j["maneuvers"] = {{"through", maneuver(s.through)}, {"left_turn", maneuver(s.left_turn)}};
  j["first_alert"] = s.first_alert ? alert_json(*s.first_alert) : ordered_json(nullptr);
  return j.dump(2);
}

std::vector<std::string> alert_digest(std::span<const TwinEvent> events) {
  std::vector<std::string> lines;
  struct Run {
    double t_first, t_last;
    int k_min, count;
    double cre_max;
  };
  std::optional<Run> runs[2];
  auto flush = [&](Maneuver m) {
    auto& r = runs[m == Maneuver::through ? 0 : 1];
    if (!r) return;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s alert t=%.1f..%.1f s (%d ticks) earliest k=%d max CRE=%.2f",
                  std::string(risk::to_string(m)).c_str(), r->t_first, r->t_last, r->count, r->k_min, r->cre_max);
    lines.emplace_back(buf);
    r.reset();
  };
  for (const auto& e : events) {
    const auto* alerts = e.alerts();
    for (Maneuver m : {Maneuver::through, Maneuver::left_turn}) {
      const Alert* hit = nullptr;
      if (alerts != nullptr) {
        for (const auto& a : *alerts)
          if (a.maneuver == m) hit = &a;
      }
      auto& r = runs[m == Maneuver::through ? 0 : 1];
      if (hit == nullptr) {
        flush(m);
      } else if (!r) {
        r = Run{e.t, e.t, hit->k, 1, hit->cre};
      } else {
        r->t_last = e.t;
        r->k_min = std::min(r->k_min, hit->k);
        r->cre_max = std::max(r->cre_max, hit->cre);
        ++r->count;
      }
    }
  }
  flush(Maneuver::through);
  flush(Maneuver::left_turn);
  return lines;
}

}  // namespace pedtwin::twin
