#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "pedtwin/dataset_io.hpp"
#include "pedtwin/errors.hpp"
#include "pedtwin/manifest.hpp"
#include "pedtwin/model_io.hpp"
#include "pedtwin/training.hpp"

using namespace pedtwin;
using cli::Args;
namespace fs = std::filesystem;

namespace {

const fs::path& root() {
  static const fs::path p = [] {
    auto d = fs::temp_directory_path() / "pedtwin_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const Args kSmall = Args::parse(
    R"({"model":{"enc1_units":16,"enc2_units":16,"dec_units":8,"epochs":60,"anneal_epochs":20},"runs":6})");

cli::CommandResult generate(const std::string& dir, std::uint64_t seed, bool collide = true) {
  Args a{{"seed", seed}, {"out", (root() / dir).string()}, {"collide", collide}};
  return cli::run_command("generate", cli::resolve_args("generate", a, kSmall));
}

cli::CommandResult train(const std::string& role, const std::string& data, const std::string& dir, Args cfg = kSmall) {
  Args a{{"seed", 1}, {"out", (root() / dir).string()}, {"role", role}, {"data", data}};
  return cli::run_command("train", cli::resolve_args("train", a, cfg));
}

Args replay_args(const std::string& gen_dir, const std::string& model_dir, const std::string& out) {
  const auto g = root() / gen_dir, m = root() / model_dir;
  Args models;
  for (const char* r : {"pedestrian", "vehicle_through", "vehicle_left"})
    models[r] = (m / ("model_" + std::string(r) + ".json")).string();
  return {{"site", (g / "site.json").string()},
          {"ped", (g / "ped.jsonl").string()},
          {"veh", (g / "veh.jsonl").string()},
          {"models", models},
          {"out", (root() / out).string()}};
}

void train_all() {
  static bool done = false;
  if (done) return;
  generate("gen", 5);
  for (const char* r : {"pedestrian", "vehicle_through", "vehicle_left"})
    train(r, (root() / "gen" / ("data_" + std::string(r) + ".jsonl")).string(), "models");
  done = true;
}

}  // namespace

TEST_CASE("generate writes streams, site, datasets and one manifest") {
  const auto r = generate("gen_a", 9);
  const auto dir = root() / "gen_a";
  for (const char* f : {"ped.jsonl", "veh.jsonl", "site.json", "ground_truth.csv", "data_pedestrian.jsonl",
                        "data_vehicle_through.jsonl", "data_vehicle_left.jsonl", "manifest_generate.json"})
    CHECK(fs::exists(dir / f));
  CHECK(r.outputs.back() == (dir / "manifest_generate.json").string());
  const auto m = read_manifest((dir / "manifest_generate.json").string());
  CHECK(m.command == "generate");
  CHECK(m.seeds == std::vector<std::uint64_t>{9});
  CHECK(verify_manifest(m).empty());

  const auto ped = read_stream((dir / "ped.jsonl").string());
  const auto veh = read_stream((dir / "veh.jsonl").string());
  CHECK(ped[1].t - ped[0].t == doctest::Approx(0.2));
  CHECK(veh[1].t - veh[0].t == doctest::Approx(1.0));

  generate("gen_b", 9);
  for (const char* f : {"ped.jsonl", "veh.jsonl", "site.json", "ground_truth.csv", "data_vehicle_left.jsonl"})
    CHECK(slurp(dir / f) == slurp(root() / "gen_b" / f));
  generate("gen_c", 10);
  CHECK(slurp(dir / "ped.jsonl") != slurp(root() / "gen_c" / "ped.jsonl"));
}

TEST_CASE("generate rejects bad inputs") {
  std::ofstream(root() / "bad_site.json") << R"({"ssd_m": 3})";
  Args a{{"out", (root() / "gen_bad").string()}, {"site", (root() / "bad_site.json").string()}};
  CHECK_THROWS_AS(cli::run_command("generate", cli::resolve_args("generate", a, Args())), ValidationError);
  CHECK_THROWS_AS(cli::resolve_args("generate", Args{{"out", "x"}}, Args::parse(R"({"gen":{"warp":1}})")),
                  ValidationError);
  CHECK_THROWS_AS(cli::resolve_args("generate", Args{{"out", "x"}}, Args::parse(R"({"bogus":1})")), ValidationError);
  Args neg{{"out", (root() / "gen_bad").string()}};
  CHECK_THROWS_AS(
      cli::run_command("generate", cli::resolve_args("generate", neg, Args::parse(R"({"gen":{"ped_rate_hz":0}})"))),
      ValidationError);
}

TEST_CASE("dataset file round trip") {
  generate("gen_ds", 2);
  const auto path = (root() / "gen_ds" / "data_vehicle_through.jsonl").string();
  const auto ds = read_dataset(path);
  CHECK(ds.role == Role::vehicle_through);
  REQUIRE(ds.data.size() > 0);
  write_dataset((root() / "copy.jsonl").string(), ds.role, ds.data);
  CHECK(slurp(path) == slurp(root() / "copy.jsonl"));
  std::ofstream(root() / "short.jsonl") << R"({"role":"pedestrian","input_steps":4,"output_steps":8,"pairs":2})" << "\n";
  CHECK_THROWS_AS(read_dataset((root() / "short.jsonl").string()), FormatError);
  CHECK_THROWS_AS(read_dataset((root() / "missing.jsonl").string()), IoError);
}

TEST_CASE("train writes model, learning curve and report") {
  train_all();
  const auto dir = root() / "models";
  std::istringstream csv(slurp(dir / "learning_curve_pedestrian.csv"));
  std::string line;
  std::getline(csv, line);
  CHECK(line == "epoch,train_mae,val_mae");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 60);
  const auto m = read_manifest((dir / "manifest_train_pedestrian.json").string());
  CHECK(verify_manifest(m).empty());
  CHECK(m.inputs.size() == 1);

  cli::rerun_manifest((dir / "manifest_train_vehicle_left.json").string(), (root() / "models_again").string());
  CHECK(sha256_file((dir / "model_vehicle_left.json").string()) ==
        sha256_file((root() / "models_again" / "model_vehicle_left.json").string()));

  auto bad = kSmall;
  bad["model"]["input_steps"] = 4;
  CHECK_THROWS_WITH_AS(train("vehicle_left", (root() / "gen" / "data_vehicle_left.jsonl").string(), "x", bad),
                       "role vehicle_left requires 10 input steps, config has 4", ValidationError);
  CHECK_THROWS_AS(train("vehicle_left", (root() / "gen" / "data_pedestrian.jsonl").string(), "x"), ValidationError);
}

TEST_CASE("eval") {
  train_all();
  const auto data = (root() / "gen" / "data_vehicle_through.jsonl").string();
  cli::run_command("eval", Args{{"model", (root() / "models" / "model_vehicle_through.json").string()},
                                {"data", data},
                                {"out", (root() / "eval").string()}});
  const auto trained = Args::parse(slurp(root() / "eval" / "eval_vehicle_through.json"));

  auto fresh = load_model((root() / "models" / "model_vehicle_through.json").string());
  fresh.weights = nn::init_weights<double>(fresh.config.shape(), fresh.config.seed);
  save_model(fresh, (root() / "untrained.json").string());
  cli::run_command("eval", Args{{"model", (root() / "untrained.json").string()},
                                {"data", data},
                                {"out", (root() / "eval_untrained").string()}});
  const auto untrained = Args::parse(slurp(root() / "eval_untrained" / "eval_vehicle_through.json"));
  CHECK(trained["rmse_m"].get<double>() < untrained["rmse_m"].get<double>());
  CHECK(trained["constant_velocity_rmse_m"].get<double>() <= 1e-9);

  CHECK_THROWS_AS(cli::run_command("eval", Args{{"model", (root() / "models" / "model_pedestrian.json").string()},
                                                {"data", data},
                                                {"out", (root() / "eval").string()}}),
                  ValidationError);
}

TEST_CASE("replay staged collision and safe encounter") {
  train_all();
  cli::run_command("replay", replay_args("gen", "models", "replay_hit"));
  const auto hit = Args::parse(slurp(root() / "replay_hit" / "summary.json"));
  CHECK(hit["alerts_total"].get<int>() >= 1);
  CHECK(hit["first_alert"]["k"].get<int>() >= 1);
  CHECK(hit["first_alert"].contains("maneuver"));
  CHECK(verify_manifest(read_manifest((root() / "replay_hit" / "manifest_replay.json").string())).empty());

  generate("gen_safe", 5, false);
  cli::run_command("replay", replay_args("gen_safe", "models", "replay_safe"));
  const auto safe = Args::parse(slurp(root() / "replay_safe" / "summary.json"));
  CHECK(safe["alerts_total"].get<int>() == 0);

  cli::run_command("replay", replay_args("gen", "models", "replay_hit2"));
  CHECK(slurp(root() / "replay_hit" / "events.jsonl") == slurp(root() / "replay_hit2" / "events.jsonl"));

  auto missing = replay_args("gen", "models", "replay_missing");
  missing["models"]["vehicle_left"] = (root() / "nope.json").string();
  CHECK_THROWS_AS(cli::run_command("replay", missing), IoError);
  CHECK_FALSE(fs::exists(root() / "replay_missing" / "events.jsonl"));
  missing["models"].erase("vehicle_left");
  CHECK_THROWS_AS(cli::run_command("replay", missing), ValidationError);
}
