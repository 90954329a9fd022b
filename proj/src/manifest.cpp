#include "pedtwin/manifest.hpp"

#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include <json.hpp>

#include "pedtwin/errors.hpp"

namespace pedtwin {

using nlohmann::ordered_json;

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 computation failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xf];
  }
  return out;
}

std::string sha256_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return sha256_hex(ss.str());
}

void RunManifest::add_input(const std::string& path) { inputs.push_back({path, sha256_file(path)}); }
void RunManifest::add_output(const std::string& path) { outputs.push_back({path, sha256_file(path)}); }

void RunManifest::set_config(const std::string& canonical_json) {
  config_json = canonical_json;
  config_digest = sha256_hex(canonical_json);
}

namespace {

ordered_json refs_json(const std::vector<FileRef>& refs) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : refs) arr.push_back({{"path", r.path}, {"sha256", r.sha256}});
  return arr;
}

std::vector<FileRef> refs_from(const ordered_json& j) {
  std::vector<FileRef> out;
  for (const auto& r : j) out.push_back({r.at("path").get<std::string>(), r.at("sha256").get<std::string>()});
  return out;
}

}  // namespace

void write_manifest(const RunManifest& m, const std::string& path) {
  ordered_json j;
  j["command"] = m.command;
  j["config_digest"] = m.config_digest;
  j["config"] = m.config_json.empty() ? ordered_json::object() : ordered_json::parse(m.config_json);
  j["seeds"] = m.seeds;
  j["inputs"] = refs_json(m.inputs);
  j["outputs"] = refs_json(m.outputs);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write manifest " + path);
  out << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path);
  try {
    const auto j = ordered_json::parse(in);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.config_digest = j.at("config_digest").get<std::string>();
    m.config_json = j.at("config").dump();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.inputs = refs_from(j.at("inputs"));
    m.outputs = refs_from(j.at("outputs"));
    return m;
  } catch (const ordered_json::exception& e) {
    throw FormatError(std::string("malformed manifest: ") + e.what());
  }
}

std::vector<std::string> verify_manifest(const RunManifest& m) {
  std::vector<std::string> bad;
  auto check = [&bad](const FileRef& r) {
    try {
      if (sha256_file(r.path) != r.sha256) bad.push_back(r.path);
    } catch (const IoError&) {
      bad.push_back(r.path);
    }
  };
  for (const auto& r : m.inputs) check(r);
  for (const auto& r : m.outputs) check(r);
  return bad;
}

}  // namespace pedtwin
