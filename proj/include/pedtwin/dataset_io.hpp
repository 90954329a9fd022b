#pragma once

#include <string>

#include "pedtwin/model.hpp"
#include "pedtwin/training.hpp"

namespace pedtwin {

struct RoleDataset {
  Role role = Role::pedestrian;
  Dataset data;
};

/// JSON lines: a header {"role", "input_steps", "output_steps", "pairs"},
/// then one {"x": steps x 8, "y": [...]} object per pair.
void write_dataset(const std::string& path, Role role, const Dataset& data);

/// Throws IoError or FormatError.
RoleDataset read_dataset(const std::string& path);

}  // namespace pedtwin
