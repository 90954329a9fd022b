#pragma once

#include "pedtwin/scenario_gen.hpp"
#include "pedtwin/training.hpp"
#include "pedtwin/twin_engine.hpp"

namespace fixtures {

inline pedtwin::gen::GenConfig base_config(std::uint64_t seed = 7) {
  pedtwin::gen::GenConfig g;
  g.seed = seed;
  g.speed_spread = 0.02;
  return g;
}

inline pedtwin::ModelConfig small_config(pedtwin::Role role, int epochs) {
  auto c = pedtwin::ModelConfig::for_role(role);
  c.enc1_units = 16;
  c.enc2_units = 16;
  c.dec_units = 8;
  c.epochs = epochs;
  c.anneal_epochs = epochs / 3;
  return c;
}

/// Small models for the three roles. Zero epochs leaves them untrained.
inline pedtwin::twin::TwinModels small_models(const pedtwin::Site& site, int epochs, int runs = 4) {
  using pedtwin::Role;
  const auto g = base_config();
  pedtwin::EncoderDecoderModel m[3];
  const Role roles[3] = {Role::pedestrian, Role::vehicle_through, Role::vehicle_left};
  for (int i = 0; i < 3; ++i) {
    const auto data = pedtwin::gen::gen_dataset(site, g, runs, roles[i]);
    auto cfg = small_config(roles[i], epochs > 0 ? epochs : 1);
    auto result = pedtwin::train(roles[i], cfg, data);
    if (epochs == 0) result.model.weights = pedtwin::nn::init_weights<double>(cfg.shape(), cfg.seed);
    m[i] = result.model;
  }
  return {m[0], m[1], m[2]};
}

}  // namespace fixtures
