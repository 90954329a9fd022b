#include "pedtwin/dataset_io.hpp"

#include <fstream>

#include <json.hpp>

#include "pedtwin/errors.hpp"

namespace pedtwin {

using nlohmann::ordered_json;

void write_dataset(const std::string& path, Role role, const Dataset& data) {
  if (data.windows.size() != data.targets.size()) throw LengthMismatch("windows and targets differ in count");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset " + path);
  const int steps = data.size() ? static_cast<int>(data.windows.front().values.rows()) : input_steps_for(role);
  const int horizon = data.size() ? static_cast<int>(data.targets.front().size()) : 8;
  out << ordered_json{{"role", to_string(role)}, {"input_steps", steps}, {"output_steps", horizon},
                      {"pairs", data.size()}}
             .dump()
      << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& x = data.windows[i].values;
    ordered_json rows = ordered_json::array();
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      ordered_json row = ordered_json::array();
      for (Eigen::Index c = 0; c < x.cols(); ++c) row.push_back(x(r, c));
      rows.push_back(std::move(row));
    }
    const auto& y = data.targets[i];
    out << ordered_json{{"x", std::move(rows)}, {"y", std::vector<double>(y.data(), y.data() + y.size())}}.dump()
        << '\n';
  }
  if (!out) throw IoError("write failed for " + path);
}

RoleDataset read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset " + path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": empty dataset file");
  RoleDataset out;
  std::size_t line_no = 1;
  try {
    const auto head = ordered_json::parse(line);
    out.role = role_from_string(head.at("role").get<std::string>());
    const int steps = head.at("input_steps").get<int>();
    const int horizon = head.at("output_steps").get<int>();
    const auto pairs = head.at("pairs").get<std::size_t>();
    while (std::getline(in, line)) {
      ++line_no;
      if (line.empty()) continue;
      const auto j = ordered_json::parse(line);
      const auto& x = j.at("x");
      const auto& y = j.at("y");
      if (x.size() != static_cast<std::size_t>(steps) || y.size() != static_cast<std::size_t>(horizon)) {
        throw FormatError(path + ":" + std::to_string(line_no) + ": pair shape does not match header");
      }
      FeatureWindow w;
      w.values.resize(steps, kFeatureCount);
      for (int r = 0; r < steps; ++r) {
        const auto& row = x[static_cast<std::size_t>(r)];
        if (row.size() != kFeatureCount) throw FormatError(path + ":" + std::to_string(line_no) + ": row needs 8 features");
        for (int c = 0; c < kFeatureCount; ++c) w.values(r, c) = row[static_cast<std::size_t>(c)].get<double>();
      }
      Eigen::VectorXd t(horizon);
      for (int k = 0; k < horizon; ++k) t[k] = y[static_cast<std::size_t>(k)].get<double>();
      out.data.windows.push_back(std::move(w));
      out.data.targets.push_back(std::move(t));
    }
    if (out.data.size() != pairs) {
      throw FormatError(path + ": header promises " + std::to_string(pairs) + " pairs, found " +
                        std::to_string(out.data.size()));
    }
  } catch (const ordered_json::exception& e) {
    throw FormatError(path + ":" + std::to_string(line_no) + ": " + e.what());
  } catch (const ValidationError& e) {
    throw FormatError(path + ": " + e.what());
  }
  return out;
}

}  // namespace pedtwin
