#pragma once

#include <cstdint>
#include <vector>

#include "utrack/ground_truth.hpp"
#include "utrack/tracker.hpp"

namespace utrack {

struct ScenarioConfig {
  int num_objects = 12;
  int num_frames = 200;
  double arena_width = 640.0;
  double arena_height = 480.0;
  int embed_dim = 16;
  int raw_dim = 32;
  double appearance_noise = 0.25;  // expected norm of the per-observation latent noise
  double confusable_fraction = 0.3;
  double occlusion_rate = 0.0;  // extra per-observation occlusion probability on top of overlap
  double occlusion_noise_boost = 3.0;
  double dropout = 0.05;
  double camera_drift = 2.0;  // per-frame step of the shared camera random walk
  double speed = 3.0;
  std::uint64_t seed = 7;

  /// Throws InvalidConfig naming the offending field.
  void validate() const;
};

struct SimulatedScenario {
  std::vector<Frame> frames;  // one entry per frame, possibly with no detections
  std::vector<GroundTruthRecord> ground_truth;
};

/// Deterministic synthetic scene; see simulator.cpp for the generation order.
SimulatedScenario generate(const ScenarioConfig& cfg);

}  // namespace utrack
