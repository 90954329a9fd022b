#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include <json.hpp>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "pedtwin/errors.hpp"
#include "pedtwin/site.hpp"
#include "pedtwin/twin_engine.hpp"

using namespace pedtwin;
using namespace pedtwin::twin;
using risk::Maneuver;

namespace {

const Site& site() {
  static const Site s = gen::make_site(fixtures::base_config());
  return s;
}

const TwinModels& untrained() {
  static const TwinModels m = fixtures::small_models(site(), 0, 2);
  return m;
}

const TwinModels& trained() {
  static const TwinModels m = fixtures::small_models(site(), 60, 6);
  return m;
}

SensorRecord at_arc(const geo::PathPolyline& path, double s, double t, AgentKind kind, double speed) {
  SensorRecord r;
  r.t = t;
  r.kind = kind;
  r.agent_id = kind == AgentKind::pedestrian ? "ped-1" : "veh-1";
  r.pos = geo::point_at_arc_length(path, s).point;
  r.speed_mps = speed;
  r.accel = {0.0, 0.0, 9.80665};
  return r;
}

// Pedestrian walking 1.4 m/s at 5 Hz until `t_end`, ending at arc `s_end`.
TrackState ped_track(double s_end, double t_end, double speed = 1.4) {
  auto tr = TrackState::make("ped-1", AgentKind::pedestrian);
  for (int i = 25; i >= 0; --i) {
    const double t = t_end - 0.2 * i;
    append_record(tr, at_arc(site().crosswalk, std::max(0.0, s_end - speed * 0.2 * i), t, AgentKind::pedestrian, speed),
                  site().crosswalk);
  }
  return tr;
}

TrackState veh_track(double s_end, double t_end, int n = 12, double speed = 11.176) {
  auto tr = TrackState::make("veh-1", AgentKind::vehicle);
  for (int i = n - 1; i >= 0; --i) {
    append_record(tr, at_arc(site().approach, std::max(0.0, s_end - speed * i), t_end - i, AgentKind::vehicle, speed),
                  site().approach);
  }
  return tr;
}

ScenarioPredictions crash_predictions() {
  // Vehicle heading north on the approach, pedestrian crossing eastwards.
  // Step 3 puts the pedestrian 14.38 m ahead at -8.46 deg, step 4 at
  // 6.24 m and +0.58 deg; every other step is clear.
  const double deg = std::numbers::pi / 180.0;
  const double c = site().conflict_s_approach, x0 = site().conflict_s_crosswalk;
  auto ped_arc = [&](double d, double a) { return x0 + d * std::sin(a * deg); };
  auto veh_arc = [&](double d, double a) { return c - d * std::cos(a * deg); };
  ScenarioPredictions p;
  p.ped_base_s = 17.0;
  p.veh_base_s = 270.0;
  p.ped_direction = 1;
  p.ped_increments.resize(8);
  p.through_increments.resize(8);
  p.ped_increments << 0.2, 0.35, ped_arc(14.38, -8.46) - 17.0, ped_arc(6.24, 0.58) - 17.0, 3.0, 3.2, 3.4, 3.6;
  p.through_increments << 10.0, 25.0, veh_arc(14.38, -8.46) - 270.0, veh_arc(6.24, 0.58) - 270.0, 70.0, 80.0, 90.0,
      100.0;
  p.left_increments = p.through_increments;
  return p;
}

}  // namespace

TEST_CASE("synthetic site geometry") {
  const auto& s = site();
  CHECK(s.conflict_s_approach == doctest::Approx(330.0).epsilon(1e-6));
  CHECK(std::abs(s.conflict_s_crosswalk - 19.6) <= 1e-3);
  CHECK(s.veh_zone.s_min == doctest::Approx(330.0 - 167.64).epsilon(1e-6));
  CHECK(s.veh_zone.s_max == doctest::Approx(330.0 - (47.24 + 11.176)).epsilon(1e-6));
  CHECK(s.ped_zone.s_min == doctest::Approx(5.6));
  CHECK(s.ped_zone.s_max == doctest::Approx(26.6));
  CHECK(s.through_path.vertices().front() == s.approach.vertices().front());
  CHECK(s.left_path.length() > s.approach.length());
  const auto end = s.approach.vertices().back();
  CHECK(geo::point_at_arc_length(s.through_path, s.approach.length()).point == end);
  CHECK(geo::point_at_arc_length(s.left_path, s.approach.length()).point == end);
}

TEST_CASE("site file round trip and validation") {
  const auto spec = gen::make_site_spec(fixtures::base_config());
  const auto back = site_from_json(site_to_json(spec));
  CHECK(back.approach == spec.approach);
  CHECK(back.left_turn == spec.left_turn);
  CHECK(back.ssd_m == spec.ssd_m);
  const auto dir = std::filesystem::temp_directory_path() / "pedtwin_site_test";
  std::filesystem::create_directories(dir);
  save_site(spec, (dir / "site.json").string());
  CHECK(load_site((dir / "site.json").string()).conflict_s_approach == doctest::Approx(site().conflict_s_approach));

  auto broken = spec;
  broken.through.front() = geo::offset(broken.through.front(), 5.0, 0.0);
  CHECK_THROWS_AS(build_site(broken), ValidationError);
  CHECK_THROWS_AS(site_from_json("{}"), ValidationError);
  CHECK_THROWS_AS(site_from_json("[1,"), ValidationError);
  auto text = nlohmann::json::parse(site_to_json(spec));
  text["ssd_m"] = -3;
  CHECK_THROWS_AS(site_from_json(text.dump()), ValidationError);
}

TEST_CASE("gate") {
  const double t = 20.0;
  const Snapshot both{t, ped_track(12.0, t), veh_track(200.0, t)};
  CHECK(gate(both, site()).open);
  CHECK(gate(both, site()).reason.empty());

  const Snapshot ped_out{t, ped_track(2.0, t), veh_track(200.0, t)};
  CHECK_FALSE(gate(ped_out, site()).open);
  CHECK(gate(ped_out, site()).reason == "no pedestrian in zone");

  // 200 m before the conflict point lies beyond the 167.64 m start edge.
  const Snapshot veh_far{t, ped_track(12.0, t), veh_track(site().conflict_s_approach - 200.0, t)};
  CHECK_FALSE(gate(veh_far, site()).open);
  CHECK(gate(veh_far, site()).reason == "no vehicle in zone");
}

TEST_CASE("predict_scenarios") {
  const double t = 20.0;
  const auto snap = snapshot_at(ped_track(12.0, t), veh_track(200.0, t), t, 0.2);
  const auto p = predict_scenarios(snap, untrained());
  CHECK(p.ped_increments.size() == 8);
  CHECK(p.through_increments.size() == 8);
  CHECK(p.left_increments.size() == 8);
  CHECK(p.ped_direction == 1);
  CHECK(p.veh_base_s == doctest::Approx(200.0).epsilon(1e-6));

  const auto short_snap = snapshot_at(ped_track(12.0, t), veh_track(200.0, t, 3), t, 0.2);
  CHECK_THROWS_AS(predict_scenarios(short_snap, untrained()), InsufficientHistory);
}

TEST_CASE("standing pedestrian predicts no progress") {
  auto g = fixtures::base_config();
  g.ped_speed_mps = 0.0;
  g.ped_start_s = 12.0;
  g.duration_s = 40.0;
  const auto data = gen::gen_dataset(site(), g, 3, Role::pedestrian);
  const auto model = train(Role::pedestrian, fixtures::small_config(Role::pedestrian, 5), data).model;
  const auto pred = predict_raw(model, data.windows);
  CHECK(pred.cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("evaluate_scenarios: far apart, crash rows, order") {
  ScenarioPredictions far;
  far.ped_base_s = 1.0;
  far.veh_base_s = 0.0;
  far.ped_increments = Eigen::VectorXd::Zero(8);
  far.through_increments = Eigen::VectorXd::LinSpaced(8, 1.0, 8.0);
  far.left_increments = far.through_increments;
  const auto none = evaluate_scenarios(far, site(), risk::CrrParams::make());
  CHECK(none.size() == 16);
  for (const auto& a : none) CHECK_FALSE(a.in_crr);
  CHECK(generate_alerts(none, 1.0).empty());

  const auto preds = crash_predictions();
  const auto params = risk::CrrParams::make();
  const auto all = evaluate_scenarios(preds, site(), params);
  for (int m = 0; m < 2; ++m) {
    for (int k = 1; k <= 8; ++k) {
      const auto& a = all[static_cast<std::size_t>(m * 8 + k - 1)];
      CHECK(a.step_k == k);
      CHECK(a.maneuver == (m == 0 ? Maneuver::through : Maneuver::left_turn));
      CHECK(a.is_crash == (k == 3 || k == 4));
    }
  }
  CHECK(std::abs(all[2].geometry.distance_m - 14.38) <= 0.01);
  CHECK(std::abs(all[2].geometry.bearing_offset_deg + 8.46) <= 0.01);
  CHECK(std::abs(all[2].cre - 1.18) <= 0.005);
  CHECK(std::abs(all[3].geometry.distance_m - 6.24) <= 0.01);
  CHECK(std::abs(all[3].geometry.bearing_offset_deg - 0.58) <= 0.01);
  CHECK(std::abs(all[3].cre - 2.72) <= 0.005);

  const auto alerts = generate_alerts(all, 42.0);
  REQUIRE(alerts.size() == 2);
  CHECK(alerts[0].maneuver == Maneuver::through);
  CHECK(alerts[0].k == 3);
  CHECK(alerts[0].t_issued == 42.0);
  CHECK(alerts[0].cre == all[2].cre);
  CHECK(alerts[1].maneuver == Maneuver::left_turn);

  std::vector<std::pair<Maneuver, int>> order;
  for (Maneuver m : {Maneuver::through, Maneuver::left_turn})
    for (int k = 1; k <= 8; ++k) order.emplace_back(m, k);
  std::mt19937_64 rng(4);
  std::shuffle(order.begin(), order.end(), rng);
  for (const auto& [m, k] : order) {
    const auto a = assess_scenario(preds, site(), params, m, k);
    CHECK(a == all[static_cast<std::size_t>((m == Maneuver::through ? 0 : 8) + k - 1)]);
  }

  auto bad = preds;
  bad.left_increments[2] = std::nan("");
  CHECK_THROWS_AS(evaluate_scenarios(bad, site(), params), ValidationError);
}

TEST_CASE("generate_alerts picks the earliest crash per maneuver") {
  const auto p = risk::CrrParams::make();
  std::vector<risk::RiskAssessment> v;
  for (Maneuver m : {Maneuver::through, Maneuver::left_turn}) {
    for (int k = 1; k <= 8; ++k) {
      const bool crash = m == Maneuver::left_turn && k == 7;
      v.push_back(risk::assess_geometry(k, m, {crash ? 16.52 : 30.0, 2.51}, p));
    }
  }
  const auto a = generate_alerts(v, 3.0);
  REQUIRE(a.size() == 1);
  CHECK(a[0].maneuver == Maneuver::left_turn);
  CHECK(a[0].k == 7);
  CHECK(std::abs(a[0].cre - 1.03) <= 0.005);
}

TEST_CASE("engine ticks") {
  TwinEngine engine(site(), untrained());
  const std::vector<SensorRecord> veh_only{at_arc(site().approach, 100.0, 1.0, AgentKind::vehicle, 11.0)};
  const auto& e = engine.step(veh_only);
  CHECK(e.skipped());
  CHECK(std::get<GateSkipped>(e.body).reason == "no pedestrian data");
  CHECK(e.t == 1.0);

  // A record going back in time is an ingest error, not an exception.
  const std::vector<SensorRecord> stale{at_arc(site().approach, 90.0, 0.5, AgentKind::vehicle, 11.0)};
  const auto& e2 = engine.step(stale);
  CHECK(e2.skipped());
  CHECK(std::get<GateSkipped>(e2.body).reason.rfind("ingest error", 0) == 0);
  CHECK(engine.events().size() == 2);

  auto bad_models = untrained();
  std::swap(bad_models.through, bad_models.left);
  CHECK_THROWS_AS(TwinEngine(site(), bad_models), ValidationError);
}

TEST_CASE("replay is deterministic and one event per vehicle record") {
  auto g = fixtures::base_config(21);
  const auto enc = gen::gen_encounter(site(), g, true);
  auto run = [&] {
    TwinEngine engine(site(), untrained());
    replay(engine, enc.ped.records, enc.veh.records);
    std::string log;
    for (const auto& e : engine.events()) log += event_to_json(e) + "\n";
    return std::pair{engine.events().size(), log};
  };
  const auto a = run();
  const auto b = run();
  CHECK(a.first == enc.veh.records.size());
  CHECK(a.second == b.second);
}

TEST_CASE("no pedestrian in the crosswalk means no alerts") {
  auto g = fixtures::base_config(5);
  g.ped_speed_mps = 0.0;
  g.ped_start_s = 1.0;
  auto ped = gen::gen_trajectory(site(), g, AgentKind::pedestrian);
  g.ped_speed_mps = 1.4;
  g.t0_s = -10.0;
  auto veh = gen::gen_trajectory(site(), g, AgentKind::vehicle);
  TwinEngine engine(site(), trained());
  replay(engine, ped.records, veh.records);
  for (const auto& e : engine.events()) {
    CHECK(e.skipped());
    CHECK(e.alerts() == nullptr);
  }
  CHECK(summarize(engine.events()).through.alert_count == 0);
}

TEST_CASE("staged encounters agree with the ground-truth oracle") {
  for (int i = 0; i < 4; ++i) {
    CAPTURE(i);
    auto g = fixtures::base_config(300 + static_cast<std::uint64_t>(i));
    g.maneuver = i % 2 ? Maneuver::left_turn : Maneuver::through;
    const bool collide = i < 2;
    const auto enc = gen::gen_encounter(site(), g, collide);
    TwinEngine engine(site(), trained());
    replay(engine, enc.ped.records, enc.veh.records);
    const auto truth = oracle::encounter_oracle(enc, g);
    CHECK(truth.any() == collide);
    const auto s = summarize(engine.events());
    CHECK(s.evaluated == truth.gated_ticks);
    for (int m = 0; m < 2; ++m) {
      const auto& want = truth.first[static_cast<std::size_t>(m)];
      std::optional<Alert> got;
      for (const auto& e : engine.events()) {
        if (const auto* al = e.alerts()) {
          for (const auto& a : *al)
            if (!got && a.maneuver == (m == 0 ? Maneuver::through : Maneuver::left_turn)) got = a;
        }
      }
      REQUIRE(got.has_value() == want.has_value());
      if (got) CHECK(std::abs((got->t_issued + got->k) - want->when()) <= 1.0 + 1e-9);
    }
  }
}

TEST_CASE("gating soundness during a replay") {
  auto g = fixtures::base_config(77);
  const auto enc = gen::gen_encounter(site(), g, true);
  TwinEngine engine(site(), untrained());
  std::size_t next_ped = 0;
  for (const auto& v : enc.veh.records) {
    std::vector<SensorRecord> batch;
    while (next_ped < enc.ped.records.size() && enc.ped.records[next_ped].t <= v.t + 1e-9)
      batch.push_back(enc.ped.records[next_ped++]);
    batch.push_back(v);
    const auto& e = engine.step(batch);
    bool open = false;
    if (engine.ped_track() && engine.veh_track()) {
      try {
        open = gate(snapshot_at(*engine.ped_track(), *engine.veh_track(), v.t, 0.2), site()).open;
      } catch (const NoAlignedSample&) {
      }
    }
    if (!open) CHECK(e.skipped());
  }
}

TEST_CASE("event and summary json") {
  const auto preds = crash_predictions();
  const auto all = evaluate_scenarios(preds, site(), risk::CrrParams::make());
  TwinEvent e{5.0, AlertIssued{generate_alerts(all, 5.0), all}};
  const std::string line = event_to_json(e);
  CHECK(line.find('\n') == std::string::npos);
  const auto j = nlohmann::ordered_json::parse(line);
  CHECK(j["event"] == "alert_issued");
  std::vector<std::string> keys;
  for (const auto& [k, v] : j["alerts"][0].items()) keys.push_back(k);
  CHECK(keys == std::vector<std::string>{"t", "maneuver", "k", "cre", "ped_lat", "ped_lon", "veh_lat", "veh_lon"});
  CHECK(j["assessments"].size() == 16);

  risk::RiskAssessment hit = risk::assess_geometry(1, Maneuver::through, {0.0, 0.0}, risk::CrrParams::make());
  TwinEvent inf_event{6.0, Evaluated{{hit}}};
  CHECK(nlohmann::json::parse(event_to_json(inf_event))["assessments"][0]["cre"] == "inf");
  TwinEvent skip{7.0, GateSkipped{"no vehicle in zone"}};
  CHECK(event_to_json(skip) == R"({"t":7.0,"event":"gate_skipped","reason":"no vehicle in zone"})");

  const std::vector<TwinEvent> log{skip, e, TwinEvent{6.0, AlertIssued{generate_alerts(all, 6.0), all}}, skip};
  const auto s = summarize(log);
  CHECK(s.ticks == 4);
  CHECK(s.skipped == 2);
  CHECK(s.through.alert_count == 2);
  CHECK(s.left_turn.earliest_k == 3);
  CHECK(s.first_alert->t_issued == 5.0);
  const auto sj = nlohmann::json::parse(summary_to_json(s));
  CHECK(sj["alerts_total"] == 4);
  CHECK(sj["maneuvers"]["through"]["earliest_k"] == 3);
  const auto digest = alert_digest(log);
  REQUIRE(digest.size() == 2);
  CHECK(digest[0].find("through") != std::string::npos);
  CHECK(digest[0].find("(2 ticks)") != std::string::npos);
}
