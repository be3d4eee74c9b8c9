#pragma once

#include <set>
#include <span>
#include <string>
#include <vector>

#include "utrack/ground_truth.hpp"
#include "utrack/tracker.hpp"

namespace utrack {

class LinearEmbedder;

/// How well the uncertainty flag separates wrong from correct associations.
/// An association is wrong when the detection's identity differs from the
/// identity the tracklet was born with.
struct SeparationReport {
  std::size_t wrong_total = 0;
  std::size_t wrong_flagged_uncertain = 0;
  std::size_t correct_total = 0;
  std::size_t correct_flagged_certain = 0;

  double wrong_flag_rate() const;
  double correct_certain_rate() const;

  std::string to_text() const;
  static SeparationReport from_text(const std::string& text);
  friend bool operator==(const SeparationReport&, const SeparationReport&) = default;
};

struct AccuracyPoint {
  int age = 0;
  double accuracy = 0.0;
  std::size_t total = 0;
};

struct AccuracyCurve {
  std::vector<AccuracyPoint> points;  // ages strictly increasing

  /// Accuracy at `age`, or a negative value when no tracklet reaches it.
  double at(int age) const;
};

/// Age is the record position within the tracklet (0 at birth). Ages that no
/// tracklet reaches are omitted. Throws MissingGroundTruth.
AccuracyCurve pseudo_accuracy(std::span<const Tracklet> tracklets, const GroundTruth& gt, int max_age);

/// Rows whose stage is in `stages` are scored; birth rows (stage 0) supply
/// each track's anchor identity. Throws MissingGroundTruth.
SeparationReport uncertainty_separation(std::span<const LogRow> log, const GroundTruth& gt,
                                        const std::set<Stage>& stages = {Stage::Matched, Stage::Rectified});

/// Number of changes of assigned tracklet id along each true trajectory.
std::size_t id_switches(std::span<const Tracklet> tracklets, const GroundTruth& gt);

struct DeltaSummary {
  std::size_t count = 0;
  double mean = 0.0;
  double fraction_positive = 0.0;
  double histogram_lo = -2.0;
  double histogram_hi = 2.0;
  std::vector<std::size_t> histogram;  // equal-width bins over [lo, hi]

  std::string to_text() const;
};

/// For every detection whose identity reappears in the next frame:
/// similarity to its true successor minus the best similarity to any other
/// next-frame detection. Detections without a successor or without a
/// distractor are skipped.
DeltaSummary similarity_delta(std::span<const Frame> frames, const GroundTruth& gt, int bins = 20);
DeltaSummary similarity_delta(const LinearEmbedder& embedder, std::span<const Frame> frames, const GroundTruth& gt,
                              int bins = 20);

std::string curve_to_text(const AccuracyCurve& curve);

}  // namespace utrack
