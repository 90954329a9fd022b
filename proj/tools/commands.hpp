#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace pedtwin::cli {

using Args = nlohmann::ordered_json;

/// Files a command wrote, manifest last, plus human-readable lines for stdout.
struct CommandResult {
  std::vector<std::string> outputs;
  std::vector<std::string> report;
};

/// Fills defaults for `command` and merges an optional config file object
/// ({"gen": {...}, "model": {...}, "runs": n, "collide": b}) into `args`.
Args resolve_args(const std::string& command, Args args, const Args& config_file);

/// Runs generate / train / eval / replay on fully resolved arguments and
/// writes exactly one manifest. Throws pedtwin::Error on failure.
CommandResult run_command(const std::string& command, const Args& args);

/// Re-executes the command recorded in a manifest, writing into `out_dir`.
CommandResult rerun_manifest(const std::string& manifest_path, const std::string& out_dir);

}  // namespace pedtwin::cli
