#pragma once

#include <Eigen/Core>
#include <optional>
#include <span>
#include <vector>

#include "utrack/assignment.hpp"
#include "utrack/geometry.hpp"
#include "utrack/uncertainty.hpp"

namespace utrack {

using Embedding = Eigen::VectorXd;

struct Detection {
  int frame = 0;
  int det_index = 0;
  BoundingBox box;
  double confidence = 1.0;
  Embedding embedding;  // unit norm
  Embedding features;   // raw appearance features; empty when not available
};

struct Frame {
  int index = 0;
  std::vector<Detection> detections;
};

struct TrackRecord {
  int frame = 0;
  int det_index = 0;
  BoundingBox box;
  double confidence = 1.0;
  Embedding embedding;
  double delta = 0.0;  // association uncertainty of the link that produced this record; 0 at birth
};

enum class TrackState { Active, Lost, Removed };

struct Tracklet {
  int id = 0;
  std::vector<TrackRecord> records;
  TrackState state = TrackState::Active;
  int lost_age = 0;
  Embedding smoothed;  // running average, only maintained in EMA mode

  const TrackRecord& last() const { return records.back(); }
  const TrackRecord* at_frame(int frame) const;
  std::vector<double> deltas() const;
};

struct TrackEmbedding {
  enum class Mode { Last, Ema };
  Mode mode = Mode::Last;
  double alpha = 0.9;  // weight of the running average in EMA mode
};

struct TrackerConfig {
  UncertaintyMargins margins;
  double beta = 0.1;        // IoU gate of the rectification stage
  int window = 5;           // number of recent track embeddings averaged during rectification
  double det_conf_min = 0.6;
  int max_lost = 30;
  double sim_floor = kNoFloor;
  bool utl_enabled = true;
  TrackEmbedding track_embedding;

  void validate() const;
};

enum class Stage : int { Birth = 0, Matched = 1, Rectified = 2 };

/// One association decision. Stage-1 rows are written for every Hungarian
/// pair, including pairs that verification later dissolves.
struct LogRow {
  int frame = 0;
  int det_index = 0;
  int track_id = 0;
  double c1 = 0.0;
  double c2 = 0.0;
  double sigma = 0.0;
  double gamma = 0.0;
  double delta = 0.0;
  Stage stage = Stage::Birth;
};

struct VerifiedPair {
  std::size_t row = 0;  // detection
  std::size_t col = 0;  // track column
  AssociationVerdict verdict;
};

struct UncertainPool {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> cols;
};

struct Verification {
  std::vector<VerifiedPair> certain;
  std::vector<VerifiedPair> uncertain;
  UncertainPool pool;  // dissolved pairs plus everything the matching left over
};

struct RectifiedPair {
  std::size_t row = 0;
  std::size_t col = 0;
  double score = 0.0;  // window-averaged similarity
};

/// Detection-vs-track cosine similarities against each track's representative
/// embedding. Throws DimensionMismatch.
SimilarityMatrix build_similarity(std::span<const Tracklet* const> tracks, std::span<const Detection> dets,
                                  const TrackerConfig& cfg);

Verification verify(const Matching& matching, const SimilarityMatrix& m, const TrackerConfig& cfg);

/// Re-matches the uncertain pool with window-averaged similarity gated by
/// IoU against each track's last box. Gated or non-positive cells are never
/// accepted.
std::vector<RectifiedPair> rectify(const UncertainPool& pool, std::span<const Detection> dets,
                                   std::span<const Tracklet* const> tracks, const TrackerConfig& cfg);

struct AssociationOutcome {
  int frame = 0;
  std::vector<LogRow> rows;
  std::vector<std::pair<int, int>> assignments;  // (det_index, track id), births included
};

/// Online tracker. Single owner; frames must arrive in increasing order.
class Tracker {
 public:
  explicit Tracker(TrackerConfig cfg);

  AssociationOutcome step(const Frame& frame);

  const TrackerConfig& config() const { return cfg_; }
  const std::vector<Tracklet>& tracklets() const { return tracklets_; }
  const std::vector<LogRow>& log() const { return log_; }

 private:
  void extend(Tracklet& track, const Detection& det, double delta);
  Tracklet& spawn(const Detection& det);

  TrackerConfig cfg_;
  std::vector<Tracklet> tracklets_;  // every tracklet ever created, in id order
  std::vector<LogRow> log_;
  std::optional<int> last_frame_;
  int next_id_ = 1;
};

struct SequenceResult {
  std::vector<Tracklet> tracklets;
  std::vector<LogRow> log;
};

SequenceResult track_sequence(std::span<const Frame> frames, const TrackerConfig& cfg);

}  // namespace utrack
