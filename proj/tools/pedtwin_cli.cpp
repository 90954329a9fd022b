#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "pedtwin/errors.hpp"

using pedtwin::cli::Args;

namespace {

Args read_config(const std::string& path) {
  if (path.empty()) return Args();
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pedtwin::IoError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return Args::parse(ss.str());
  } catch (const Args::exception& e) {
    throw pedtwin::ValidationError("config " + path + " is not valid JSON: " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Pedestrian-vehicle collision warning twin"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  std::string config, out, site, role, data, model, ped, veh, manifest;
  std::vector<std::string> models;
  int runs = -1;
  bool safe = false;

  auto* gen = app.add_subcommand("generate", "Synthesize a site, an encounter and training sets");
  gen->add_option("--seed", seed, "Generator seed");
  gen->add_option("--config", config, "JSON config file");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_option("--site", site, "Site file to use instead of the synthetic layout");
  gen->add_option("--runs", runs, "Runs per role for the training sets (0 skips them)");
  gen->add_flag("--safe", safe, "Stage a safe encounter instead of a collision");

  auto* tr = app.add_subcommand("train", "Train one role's predictor");
  tr->add_option("--seed", seed, "Weight and shuffle seed");
  tr->add_option("--config", config, "JSON config file");
  tr->add_option("--out", out, "Output directory")->required();
  tr->add_option("--role", role, "pedestrian | vehicle_through | vehicle_left")->required();
  tr->add_option("--data", data, "Dataset file from generate")->required();

  auto* ev = app.add_subcommand("eval", "Report a model's RMSE on a dataset");
  ev->add_option("--model", model, "Model file")->required();
  ev->add_option("--data", data, "Dataset file")->required();
  ev->add_option("--out", out, "Output directory")->required();

  auto* rp = app.add_subcommand("replay", "Run the twin over recorded streams");
  rp->add_option("--site", site, "Site file")->required();
  rp->add_option("--ped", ped, "Pedestrian stream (JSONL or CSV)")->required();
  rp->add_option("--veh", veh, "Vehicle stream (JSONL or CSV)")->required();
  rp->add_option("--model", models, "role=path, once per role")->required();
  rp->add_option("--out", out, "Output directory")->required();

  auto* re = app.add_subcommand("rerun", "Repeat the run recorded in a manifest");
  re->add_option("manifest", manifest, "Manifest file")->required();
  re->add_option("--out", out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    pedtwin::cli::CommandResult result;
    if (*re) {
      result = pedtwin::cli::rerun_manifest(manifest, out);
    } else {
      const auto* sub = app.get_subcommands().front();
      const std::string command = sub->get_name();
      Args args{{"seed", seed}, {"out", out}};
      if (command == "generate") {
        if (!site.empty()) args["site"] = site;
        if (runs >= 0) args["runs"] = runs;
        if (safe) args["collide"] = false;
      } else if (command == "train") {
        args["role"] = role;
        args["data"] = data;
      } else if (command == "eval") {
        args.erase("seed");
        args["model"] = model;
        args["data"] = data;
      } else {
        args.erase("seed");
        args["site"] = site;
        args["ped"] = ped;
        args["veh"] = veh;
        Args by_role = Args::object();
        for (const auto& m : models) {
          const auto eq = m.find('=');
          if (eq == std::string::npos || eq == 0) throw pedtwin::ValidationError("--model expects role=path, got " + m);
          by_role[m.substr(0, eq)] = m.substr(eq + 1);
        }
        args["models"] = by_role;
      }
      result = pedtwin::cli::run_command(command, pedtwin::cli::resolve_args(command, args, read_config(config)));
    }
    for (const auto& line : result.report) std::cout << line << '\n';
  } catch (const pedtwin::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
