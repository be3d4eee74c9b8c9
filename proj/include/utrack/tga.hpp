#pragma once

#include <span>
#include <vector>

#include "utrack/geometry.hpp"
#include "utrack/rng.hpp"
#include "utrack/tracker.hpp"

namespace utrack {

struct AugmentationPlan {
  int source_track_id = 0;
  int current_frame = 0;
  int target_frame = 0;  // strictly earlier than current_frame
  AffineTransform transform;
  double jitter_magnitude = 0.0;
};

struct WeightedCandidate {
  int key = 0;  // track id (source anchors) or frame index (target anchors)
  double weight = 0.0;
};

struct SamplingWeights {
  std::vector<WeightedCandidate> candidates;
};

/// Softmax of -Omega over tracklets that have a record at `frame` and at least
/// one earlier record. Omega is computed over the history up to `frame`.
/// Throws NoCandidates.
SamplingWeights source_anchor_weights(std::span<const Tracklet> tracklets, int frame);

/// Softmax of the recorded delta over the tracklet's records before `frame`.
/// A positive `max_offset` restricts candidates to frames in
/// [frame - max_offset, frame - 1]. Throws NoHistory.
SamplingWeights target_anchor_weights(const Tracklet& track, int frame, int max_offset = 0);

/// Categorical draw; returns the chosen candidate's key.
int sample(const SamplingWeights& weights, Rng& rng);

/// Default corner jitter: 2% of the box diagonal.
double default_jitter(const BoundingBox& anchor);

/// Fits the map from the anchor's box at `frame` to its box at `target`, with
/// each target corner displaced by uniform noise in [-jitter, jitter] per axis.
/// Throws NoHistory when either record is missing, DegenerateBox for invalid
/// boxes.
AugmentationPlan build_plan(const Tracklet& track, int frame, int target, double jitter, Rng& rng);

/// Boxes move under the plan's transform; everything else is carried over.
std::vector<Detection> augment_detections(std::span<const Detection> dets, const AugmentationPlan& plan);

}  // namespace utrack
