#include "commands.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pedtwin/dataset_io.hpp"
#include "pedtwin/errors.hpp"
#include "pedtwin/manifest.hpp"
#include "pedtwin/model_io.hpp"
#include "pedtwin/scenario_gen.hpp"
#include "pedtwin/site.hpp"
#include "pedtwin/training.hpp"
#include "pedtwin/twin_engine.hpp"

namespace pedtwin::cli {

namespace fs = std::filesystem;

namespace {

const char* const kRoles[] = {"pedestrian", "vehicle_through", "vehicle_left"};

Args gen_defaults() {
  const gen::GenConfig g;
  return {{"ped_speed_mps", g.ped_speed_mps},
          {"veh_speed_mps", g.veh_speed_mps},
          {"speed_spread", 0.02},
          {"speed_noise_sigma", g.speed_noise_sigma},
          {"position_noise_sigma_m", g.position_noise_sigma_m},
          {"imu_noise_sigma", g.imu_noise_sigma},
          {"maneuver", "through"},
          {"ped_start_s", g.ped_start_s},
          {"duration_s", g.duration_s},
          {"ped_rate_hz", g.ped_rate_hz},
          {"veh_rate_hz", g.veh_rate_hz}};
}

Args model_defaults() {
  const ModelConfig c;
  return {{"enc1_units", c.enc1_units}, {"enc2_units", c.enc2_units}, {"dec_units", c.dec_units},
          {"learning_rate", c.learning_rate}, {"epochs", c.epochs}, {"batch_size", c.batch_size},
          {"anneal_epochs", 30}, {"input_steps", nullptr}, {"output_steps", c.output_steps}};
}

void merge_known(Args& into, const Args& from, const std::string& section) {
  if (from.is_null()) return;
  if (!from.is_object()) throw ValidationError("config section '" + section + "' must be an object");
  for (const auto& [k, v] : from.items()) {
    if (!into.contains(k)) throw ValidationError("unknown key '" + k + "' in config section '" + section + "'");
    into[k] = v;
  }
}

template <typename T>
T get(const Args& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const Args::exception& e) {
    throw ValidationError(std::string("bad value for '") + key + "': " + e.what());
  }
}

gen::GenConfig gen_config(const Args& args) {
  const Args& g = args.at("gen");
  gen::GenConfig c;
  c.seed = get<std::uint64_t>(args, "seed");
  c.ped_speed_mps = get<double>(g, "ped_speed_mps");
  c.veh_speed_mps = get<double>(g, "veh_speed_mps");
  c.speed_spread = get<double>(g, "speed_spread");
  c.speed_noise_sigma = get<double>(g, "speed_noise_sigma");
  c.position_noise_sigma_m = get<double>(g, "position_noise_sigma_m");
  c.imu_noise_sigma = get<double>(g, "imu_noise_sigma");
  c.maneuver = risk::maneuver_from_string(get<std::string>(g, "maneuver"));
  c.ped_start_s = get<double>(g, "ped_start_s");
  c.duration_s = get<double>(g, "duration_s");
  c.ped_rate_hz = get<double>(g, "ped_rate_hz");
  c.veh_rate_hz = get<double>(g, "veh_rate_hz");
  c.validate();
  return c;
}

ModelConfig model_config(const Args& args, Role role) {
  const Args& m = args.at("model");
  ModelConfig c = ModelConfig::for_role(role);
  if (!m.at("input_steps").is_null()) c.input_steps = get<int>(m, "input_steps");
  c.output_steps = get<int>(m, "output_steps");
  c.enc1_units = get<int>(m, "enc1_units");
  c.enc2_units = get<int>(m, "enc2_units");
  c.dec_units = get<int>(m, "dec_units");
  c.learning_rate = get<double>(m, "learning_rate");
  c.epochs = get<int>(m, "epochs");
  c.batch_size = get<int>(m, "batch_size");
  c.anneal_epochs = get<int>(m, "anneal_epochs");
  c.seed = get<std::uint64_t>(args, "seed");
  c.validate();
  if (c.input_steps != input_steps_for(role)) {
    throw ValidationError("role " + std::string(to_string(role)) + " requires " + std::to_string(input_steps_for(role)) +
                          " input steps, config has " + std::to_string(c.input_steps));
  }
  return c;
}

std::string num(double x) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void write_text(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << body;
  if (!out) throw IoError("write failed for " + path);
}

fs::path out_dir(const Args& args) {
  const fs::path dir = get<std::string>(args, "out");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw IoError("cannot create output directory " + dir.string());
  return dir;
}

struct Recorder {
  RunManifest manifest;
  CommandResult result;

  Recorder(const std::string& command, const Args& args) {
    manifest.command = command;
    manifest.set_config(args.dump());
  }
  void output(const fs::path& p) {
    manifest.add_output(p.string());
    result.outputs.push_back(p.string());
  }
  CommandResult finish(const fs::path& path) {
    write_manifest(manifest, path.string());
    result.outputs.push_back(path.string());
    return result;
  }
};

CommandResult generate(const Args& args) {
  const auto dir = out_dir(args);
  const auto g = gen_config(args);
  Recorder rec("generate", args);
  rec.manifest.seeds = {g.seed};

  SiteSpec spec;
  if (args.at("site").is_null()) {
    spec = gen::make_site_spec(g);
  } else {
    const auto site_in = get<std::string>(args, "site");
    rec.manifest.add_input(site_in);
    std::ifstream in(site_in, std::ios::binary);
    if (!in) throw IoError("cannot open site file " + site_in);
    std::ostringstream ss;
    ss << in.rdbuf();
    spec = site_from_json(ss.str());
  }
  const Site site = build_site(spec);
  save_site(spec, (dir / "site.json").string());
  rec.output(dir / "site.json");

  const bool collide = get<bool>(args, "collide");
  const auto enc = gen::gen_encounter(site, g, collide);
  write_stream((dir / "ped.jsonl").string(), enc.ped.records);
  write_stream((dir / "veh.jsonl").string(), enc.veh.records);
  std::vector<gen::GroundTruth> truth = enc.ped.truth;
  truth.insert(truth.end(), enc.veh.truth.begin(), enc.veh.truth.end());
  gen::write_ground_truth((dir / "ground_truth.csv").string(), truth);
  for (const char* f : {"ped.jsonl", "veh.jsonl", "ground_truth.csv"}) rec.output(dir / f);

  const int runs = get<int>(args, "runs");
  if (runs > 0) {
    for (const char* r : kRoles) {
      const Role role = role_from_string(r);
      const fs::path p = dir / ("data_" + std::string(r) + ".jsonl");
      write_dataset(p.string(), role, gen::gen_dataset(site, g, runs, role));
      rec.output(p);
    }
  }
  rec.result.report.push_back(std::string(collide ? "staged collision" : "safe encounter") + ": pedestrian at conflict t=" +
                              num(enc.ped_conflict_t) + " s, vehicle t=" + num(enc.veh_conflict_t) + " s");
  return rec.finish(dir / "manifest_generate.json");
}

CommandResult train_cmd(const Args& args) {
  const auto dir = out_dir(args);
  const Role role = role_from_string(get<std::string>(args, "role"));
  const ModelConfig cfg = model_config(args, role);
  const auto data_path = get<std::string>(args, "data");
  const auto ds = read_dataset(data_path);
  if (ds.role != role) {
    throw ValidationError("dataset " + data_path + " holds " + std::string(to_string(ds.role)) + " pairs, not " +
                          std::string(to_string(role)));
  }
  Recorder rec("train", args);
  rec.manifest.seeds = {cfg.seed};
  rec.manifest.add_input(data_path);

  const auto result = train(role, cfg, ds.data);
  const std::string r(to_string(role));
  const fs::path model = dir / ("model_" + r + ".json");
  save_model(result.model, model.string());
  rec.output(model);

  std::string csv = "epoch,train_mae,val_mae\n";
  for (std::size_t e = 0; e < result.report.train_mae.size(); ++e)
    csv += std::to_string(e + 1) + "," + num(result.report.train_mae[e]) + "," + num(result.report.val_mae[e]) + "\n";
  const fs::path curve = dir / ("learning_curve_" + r + ".csv");
  write_text(curve.string(), csv);
  rec.output(curve);

  const Args report{{"role", r},
                    {"train_pairs", result.report.train_size},
                    {"test_pairs", result.report.test_size},
                    {"test_rmse_m", result.report.test_rmse},
                    {"initial_test_rmse_m", result.report.initial_test_rmse},
                    {"final_train_mae_m", result.report.train_mae.back()},
                    {"final_val_mae_m", result.report.val_mae.back()}};
  const fs::path rep = dir / ("train_" + r + ".json");
  write_text(rep.string(), report.dump(2) + "\n");
  rec.output(rep);
  rec.result.report.push_back(r + ": test RMSE " + num(result.report.test_rmse) + " m (untrained " +
                              num(result.report.initial_test_rmse) + " m)");
  return rec.finish(dir / ("manifest_train_" + r + ".json"));
}

CommandResult eval_cmd(const Args& args) {
  const auto dir = out_dir(args);
  const auto model_path = get<std::string>(args, "model");
  const auto data_path = get<std::string>(args, "data");
  const auto model = load_model(model_path);
  const auto ds = read_dataset(data_path);
  if (ds.role != model.role) {
    throw ValidationError("model " + model_path + " is " + std::string(to_string(model.role)) + " but dataset " +
                          data_path + " is " + std::string(to_string(ds.role)));
  }
  Recorder rec("eval", args);
  rec.manifest.add_input(model_path);
  rec.manifest.add_input(data_path);

  // Baseline: keep the last observed speed for every future second.
  std::vector<double> cv, truth;
  for (std::size_t i = 0; i < ds.data.size(); ++i) {
    const auto& w = ds.data.windows[i].values;
    const auto p = constant_velocity_predict(w(w.rows() - 1, 0), static_cast<int>(ds.data.targets[i].size()), 1.0);
    cv.insert(cv.end(), p.data(), p.data() + p.size());
    truth.insert(truth.end(), ds.data.targets[i].data(), ds.data.targets[i].data() + ds.data.targets[i].size());
  }
  const std::string r(to_string(model.role));
  const Args report{{"role", r},
                    {"pairs", ds.data.size()},
                    {"rmse_m", evaluate_rmse(model, ds.data)},
                    {"mae_m", evaluate_mae(model, ds.data)},
                    {"constant_velocity_rmse_m", rmse(cv, truth)}};
  const fs::path rep = dir / ("eval_" + r + ".json");
  write_text(rep.string(), report.dump(2) + "\n");
  rec.output(rep);
  rec.result.report.push_back(r + ": RMSE " + num(report["rmse_m"].get<double>()) + " m over " +
                              std::to_string(ds.data.size()) + " windows");
  return rec.finish(dir / ("manifest_eval_" + r + ".json"));
}

CommandResult replay_cmd(const Args& args) {
  const auto dir = out_dir(args);
  Recorder rec("replay", args);

  const auto site_path = get<std::string>(args, "site");
  const Site site = load_site(site_path);
  rec.manifest.add_input(site_path);

  const Args& paths = args.at("models");
  auto load_role = [&](const char* role) {
    if (!paths.contains(role)) throw ValidationError(std::string("missing --model for role ") + role);
    const auto p = get<std::string>(paths, role);
    auto m = load_model(p);
    rec.manifest.add_input(p);
    return m;
  };
  twin::TwinModels models{load_role("pedestrian"), load_role("vehicle_through"), load_role("vehicle_left")};
  models.check();

  const auto ped_path = get<std::string>(args, "ped");
  const auto veh_path = get<std::string>(args, "veh");
  const auto ped = read_stream(ped_path);
  const auto veh = read_stream(veh_path);
  rec.manifest.add_input(ped_path);
  rec.manifest.add_input(veh_path);

  twin::TwinEngine engine(site, std::move(models));
  twin::replay(engine, ped, veh);

  std::string log;
  for (const auto& e : engine.events()) log += twin::event_to_json(e) + "\n";
  write_text((dir / "events.jsonl").string(), log);
  rec.output(dir / "events.jsonl");
  const auto summary = twin::summarize(engine.events());
  write_text((dir / "summary.json").string(), twin::summary_to_json(summary) + "\n");
  rec.output(dir / "summary.json");

  rec.result.report = twin::alert_digest(engine.events());
  if (rec.result.report.empty()) rec.result.report.push_back("no alerts over " + std::to_string(summary.ticks) + " ticks");
  return rec.finish(dir / "manifest_replay.json");
}

}  // namespace

Args resolve_args(const std::string& command, Args args, const Args& config_file) {
  if (!config_file.is_null() && !config_file.is_object()) throw ValidationError("config file must hold a JSON object");
  const Args cfg = config_file.is_null() ? Args::object() : config_file;
  for (const auto& [k, v] : cfg.items()) {
    if (k != "gen" && k != "model" && k != "runs" && k != "collide") throw ValidationError("unknown config key '" + k + "'");
  }
  if (!args.contains("seed") || args["seed"].is_null()) args["seed"] = 1;
  if (command == "generate") {
    Args g = gen_defaults();
    merge_known(g, cfg.contains("gen") ? cfg["gen"] : Args(), "gen");
    args["gen"] = g;
    if (!args.contains("runs")) args["runs"] = cfg.value("runs", 20);
    if (!args.contains("collide")) args["collide"] = cfg.value("collide", true);
    if (!args.contains("site")) args["site"] = nullptr;
  } else if (command == "train") {
    Args m = model_defaults();
    merge_known(m, cfg.contains("model") ? cfg["model"] : Args(), "model");
    args["model"] = m;
  }
  return args;
}

CommandResult run_command(const std::string& command, const Args& args) {
  if (command == "generate") return generate(args);
  if (command == "train") return train_cmd(args);
  if (command == "eval") return eval_cmd(args);
  if (command == "replay") return replay_cmd(args);
  throw ValidationError("unknown command '" + command + "'");
}

CommandResult rerun_manifest(const std::string& manifest_path, const std::string& out) {
  const auto m = read_manifest(manifest_path);
  Args args = Args::parse(m.config_json);
  args["out"] = out;
  return run_command(m.command, args);
}

}  // namespace pedtwin::cli
