#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace pedtwin {

/// Hex SHA-256 of a file's bytes. Throws IoError.
std::string sha256_file(const std::string& path);
std::string sha256_hex(const std::string& bytes);

struct FileRef {
  std::string path;
  std::string sha256;
};

/// Record of one CLI run: what was asked, with which seeds, from which
/// inputs, producing which outputs.
struct RunManifest {
  std::string command;
  std::string config_digest;  ///< SHA-256 of the canonical config JSON
  std::string config_json;
  std::vector<std::uint64_t> seeds;
  std::vector<FileRef> inputs;
  std::vector<FileRef> outputs;

  void add_input(const std::string& path);
  void add_output(const std::string& path);
  void set_config(const std::string& canonical_json);
};

void write_manifest(const RunManifest& m, const std::string& path);
RunManifest read_manifest(const std::string& path);

/// Paths whose current checksum differs from the recorded one (or that are
/// missing). Empty when every reference verifies.
std::vector<std::string> verify_manifest(const RunManifest& m);

}  // namespace pedtwin
