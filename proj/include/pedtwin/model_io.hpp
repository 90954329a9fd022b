#pragma once

#include <iosfwd>
#include <string>

#include "pedtwin/model.hpp"

namespace pedtwin {

inline constexpr int kModelFormatVersion = 1;

/// JSON model document: format_version, role, config, norm and every weight
/// tensor as {rows, cols, data} with row-major data. Doubles are written in
/// shortest round-trip form, so load(save(m)) is bit-exact.
std::string model_to_json(const EncoderDecoderModel& model);
EncoderDecoderModel model_from_json(const std::string& text);

void save_model(const EncoderDecoderModel& model, const std::string& path);
EncoderDecoderModel load_model(const std::string& path);

}  // namespace pedtwin
