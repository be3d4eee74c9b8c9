#include "utrack/tga.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "utrack/error.hpp"
#include "utrack/uncertainty.hpp"

namespace utrack {

namespace {

// Softmax over candidate scores with max subtraction.
SamplingWeights softmax(const std::vector<int>& keys, const std::vector<double>& scores) {
  const double top = *std::max_element(scores.begin(), scores.end());
  SamplingWeights out;
  double sum = 0.0;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const double w = std::exp(scores[i] - top);
    out.candidates.push_back({keys[i], w});
    sum += w;
  }
  for (auto& c : out.candidates) c.weight /= sum;
  return out;
}

}  // namespace

SamplingWeights source_anchor_weights(std::span<const Tracklet> tracklets, int frame) {
  std::vector<int> keys;
  std::vector<double> scores;
  for (const auto& t : tracklets) {
    if (t.at_frame(frame) == nullptr || t.records.front().frame >= frame) continue;
    std::vector<double> history;
    for (const auto& r : t.records) {
      if (r.frame <= frame) history.push_back(r.delta);
    }
    keys.push_back(t.id);
    scores.push_back(-tracklet_uncertainty(history));
  }
  if (keys.empty()) {
    throw Error(ErrorCode::NoCandidates, "no tracklet with history is present at frame " + std::to_string(frame));
  }
  return softmax(keys, scores);
}

SamplingWeights target_anchor_weights(const Tracklet& track, int frame, int max_offset) {
  std::vector<int> keys;
  std::vector<double> scores;
  for (const auto& r : track.records) {
    if (r.frame >= frame) break;
    if (max_offset > 0 && r.frame < frame - max_offset) continue;
    keys.push_back(r.frame);
    scores.push_back(r.delta);
  }
  if (keys.empty()) {
    throw Error(ErrorCode::NoHistory,
                "track " + std::to_string(track.id) + " has no record before frame " + std::to_string(frame));
  }
  return softmax(keys, scores);
}

int sample(const SamplingWeights& weights, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (const auto& c : weights.candidates) {
    acc += c.weight;
    if (u < acc) return c.key;
  }
  return weights.candidates.back().key;
}

double default_jitter(const BoundingBox& anchor) { return 0.02 * anchor.diagonal(); }

AugmentationPlan build_plan(const Tracklet& track, int frame, int target, double jitter, Rng& rng) {
  const TrackRecord* src = track.at_frame(frame);
  const TrackRecord* dst = track.at_frame(target);
  if (src == nullptr || dst == nullptr) {
    throw Error(ErrorCode::NoHistory, "track " + std::to_string(track.id) + " lacks frame " +
                                          std::to_string(src == nullptr ? frame : target));
  }
  if (target >= frame) {
    throw Error(ErrorCode::NoHistory, "target frame " + std::to_string(target) + " is not before frame " +
                                          std::to_string(frame));
  }
  if (!src->box.valid() || !dst->box.valid()) {
    throw Error(ErrorCode::DegenerateBox, "anchor box of track " + std::to_string(track.id) + " is invalid");
  }

  AugmentationPlan plan{track.id, frame, target, AffineTransform::identity(), jitter};
  if (jitter == 0.0) {
    plan.transform = box_to_affine(src->box, dst->box);
  } else {
    const auto from = src->box.corners();
    auto to = dst->box.corners();
    for (auto& p : to) {
      p.x += rng.uniform(-jitter, jitter);
      p.y += rng.uniform(-jitter, jitter);
    }
    plan.transform = solve_affine(from, to);
  }
  if (!plan.transform.invertible()) {
    throw Error(ErrorCode::DegenerateBox, "jittered anchor correspondence is not invertible");
  }
  return plan;
}

std::vector<Detection> augment_detections(std::span<const Detection> dets, const AugmentationPlan& plan) {
  std::vector<Detection> out(dets.begin(), dets.end());
  for (auto& d : out) d.box = apply_affine(plan.transform, d.box);
  return out;
}

}  // namespace utrack
