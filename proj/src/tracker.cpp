#include "utrack/tracker.hpp"

#include <algorithm>
#include <string>

#include "utrack/error.hpp"

namespace utrack {

const TrackRecord* Tracklet::at_frame(int frame) const {
  auto it = std::lower_bound(records.begin(), records.end(), frame,
                             [](const TrackRecord& r, int f) { return r.frame < f; });
  return (it != records.end() && it->frame == frame) ? &*it : nullptr;
}

std::vector<double> Tracklet::deltas() const {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.delta);
  return out;
}

void TrackerConfig::validate() const {
  margins.validate();
  if (!(beta >= 0.0 && beta < 1.0)) throw Error(ErrorCode::InvalidConfig, "beta must lie in [0, 1)");
  if (window < 1) throw Error(ErrorCode::InvalidConfig, "K must be at least 1");
  if (max_lost < 0) throw Error(ErrorCode::InvalidConfig, "max_lost must be non-negative");
  if (track_embedding.mode == TrackEmbedding::Mode::Ema &&
      !(track_embedding.alpha >= 0.0 && track_embedding.alpha < 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "EMA alpha must lie in [0, 1)");
  }
}

namespace {

const Embedding& representative(const Tracklet& t, const TrackerConfig& cfg) {
  if (cfg.track_embedding.mode == TrackEmbedding::Mode::Ema && t.smoothed.size() > 0) return t.smoothed;
  return t.last().embedding;
}

}  // namespace

SimilarityMatrix build_similarity(std::span<const Tracklet* const> tracks, std::span<const Detection> dets,
                                  const TrackerConfig& cfg) {
  SimilarityMatrix m(dets.size(), tracks.size());
  for (std::size_t r = 0; r < dets.size(); ++r) {
    for (std::size_t c = 0; c < tracks.size(); ++c) {
      const Embedding& rep = representative(*tracks[c], cfg);
      if (rep.size() != dets[r].embedding.size()) {
        throw Error(ErrorCode::DimensionMismatch,
                    "detection embedding has " + std::to_string(dets[r].embedding.size()) +
                        " dims, track " + std::to_string(tracks[c]->id) + " has " + std::to_string(rep.size()));
      }
      m(r, c) = dets[r].embedding.dot(rep);
    }
  }
  return m;
}

Verification verify(const Matching& matching, const SimilarityMatrix& m, const TrackerConfig& cfg) {
  Verification out;
  for (const auto& [r, c] : matching.pairs) {
    const auto row = m.row(r);
    VerifiedPair vp{r, c, association_uncertainty(m(r, c), second_best(row, c), cfg.margins)};
    if (vp.verdict.uncertain) {
      out.pool.rows.push_back(r);
      out.pool.cols.push_back(c);
      out.uncertain.push_back(vp);
    } else {
      out.certain.push_back(vp);
    }
  }
  out.pool.rows.insert(out.pool.rows.end(), matching.unmatched_rows.begin(), matching.unmatched_rows.end());
  out.pool.cols.insert(out.pool.cols.end(), matching.unmatched_cols.begin(), matching.unmatched_cols.end());
  std::sort(out.pool.rows.begin(), out.pool.rows.end());
  std::sort(out.pool.cols.begin(), out.pool.cols.end());
  return out;
}

std::vector<RectifiedPair> rectify(const UncertainPool& pool, std::span<const Detection> dets,
                                   std::span<const Tracklet* const> tracks, const TrackerConfig& cfg) {
  std::vector<RectifiedPair> out;
  if (pool.rows.empty() || pool.cols.empty()) return out;

  // Negative averages are as unacceptable as gated cells, so both become 0
  // and the floor of 0 removes them after assignment.
  SimilarityMatrix gated(pool.rows.size(), pool.cols.size());
  for (std::size_t i = 0; i < pool.rows.size(); ++i) {
    const Detection& det = dets[pool.rows[i]];
    for (std::size_t j = 0; j < pool.cols.size(); ++j) {
      const Tracklet& trk = *tracks[pool.cols[j]];
      if (!(iou(det.box, trk.last().box) > cfg.beta)) continue;
      const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(cfg.window), trk.records.size());
      double sum = 0.0;
      for (std::size_t k = trk.records.size() - n; k < trk.records.size(); ++k) {
        sum += det.embedding.dot(trk.records[k].embedding);
      }
      gated(i, j) = std::max(0.0, sum / static_cast<double>(n));
    }
  }
  const Matching matching = hungarian_max(gated, 0.0);
  for (const auto& [i, j] : matching.pairs) {
    out.push_back({pool.rows[i], pool.cols[j], gated(i, j)});
  }
  return out;
}

Tracker::Tracker(TrackerConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

void Tracker::extend(Tracklet& track, const Detection& det, double delta) {
  track.records.push_back({det.frame, det.det_index, det.box, det.confidence, det.embedding, delta});
  track.state = TrackState::Active;
  track.lost_age = 0;
  if (cfg_.track_embedding.mode == TrackEmbedding::Mode::Ema) {
    const double a = cfg_.track_embedding.alpha;
    Embedding mixed = a * track.smoothed + (1.0 - a) * det.embedding;
    const double norm = mixed.norm();
    track.smoothed = norm > 0.0 ? Embedding(mixed / norm) : det.embedding;
  }
}

Tracklet& Tracker::spawn(const Detection& det) {
  Tracklet t;
  t.id = next_id_++;
  t.records.push_back({det.frame, det.det_index, det.box, det.confidence, det.embedding, 0.0});
  if (cfg_.track_embedding.mode == TrackEmbedding::Mode::Ema) t.smoothed = det.embedding;
  tracklets_.push_back(std::move(t));
  return tracklets_.back();
}

AssociationOutcome Tracker::step(const Frame& frame) {
  if (last_frame_ && frame.index <= *last_frame_) {
    throw Error(ErrorCode::OutOfOrderFrame,
                "frame " + std::to_string(frame.index) + " after frame " + std::to_string(*last_frame_));
  }
  last_frame_ = frame.index;

  AssociationOutcome outcome;
  outcome.frame = frame.index;
  const auto& dets = frame.detections;

  std::vector<std::size_t> col_index;  // column -> position in tracklets_
  std::vector<const Tracklet*> cols;
  for (std::size_t i = 0; i < tracklets_.size(); ++i) {
    if (tracklets_[i].state == TrackState::Removed) continue;
    col_index.push_back(i);
    cols.push_back(&tracklets_[i]);
  }

  const SimilarityMatrix sim = build_similarity(cols, dets, cfg_);
  const Matching matching = hungarian_max(sim, cfg_.sim_floor);
  const Verification verification = verify(matching, sim, cfg_);

  auto row_for = [&](std::size_t r, std::size_t c, const AssociationVerdict& v, Stage stage) {
    return LogRow{frame.index, dets[r].det_index, cols[c]->id, v.c1, v.c2, v.sigma, v.gamma, v.delta, stage};
  };

  struct Link {
    std::size_t row, col;
    double delta;
  };
  std::vector<Link> links;
  std::vector<VerifiedPair> stage_one(verification.certain);
  stage_one.insert(stage_one.end(), verification.uncertain.begin(), verification.uncertain.end());
  std::sort(stage_one.begin(), stage_one.end(), [](const auto& a, const auto& b) { return a.row < b.row; });
  for (const auto& vp : stage_one) {
    outcome.rows.push_back(row_for(vp.row, vp.col, vp.verdict, Stage::Matched));
    if (!cfg_.utl_enabled || !vp.verdict.uncertain) links.push_back({vp.row, vp.col, vp.verdict.delta});
  }

  if (cfg_.utl_enabled) {
    for (const auto& rp : rectify(verification.pool, dets, cols, cfg_)) {
      // The recorded uncertainty always comes from the first-stage row.
      const auto row = sim.row(rp.row);
      const auto v = association_uncertainty(sim(rp.row, rp.col), second_best(row, rp.col), cfg_.margins);
      outcome.rows.push_back(row_for(rp.row, rp.col, v, Stage::Rectified));
      links.push_back({rp.row, rp.col, v.delta});
    }
  }

  std::vector<bool> row_done(dets.size(), false), col_done(cols.size(), false);
  std::sort(links.begin(), links.end(), [](const Link& a, const Link& b) { return a.row < b.row; });
  for (const auto& link : links) {
    row_done[link.row] = true;
    col_done[link.col] = true;
  }
  for (const auto& link : links) {
    Tracklet& track = tracklets_[col_index[link.col]];
    extend(track, dets[link.row], link.delta);
    outcome.assignments.emplace_back(dets[link.row].det_index, track.id);
  }
  for (std::size_t c = 0; c < cols.size(); ++c) {
    if (col_done[c]) continue;
    Tracklet& track = tracklets_[col_index[c]];
    track.lost_age += 1;
    track.state = track.lost_age > cfg_.max_lost ? TrackState::Removed : TrackState::Lost;
  }
  for (std::size_t r = 0; r < dets.size(); ++r) {
    if (row_done[r] || dets[r].confidence < cfg_.det_conf_min) continue;
    const Tracklet& born = spawn(dets[r]);
    outcome.rows.push_back(LogRow{frame.index, dets[r].det_index, born.id, 0, 0, 0, 0, 0, Stage::Birth});
    outcome.assignments.emplace_back(dets[r].det_index, born.id);
  }

  log_.insert(log_.end(), outcome.rows.begin(), outcome.rows.end());
  return outcome;
}

SequenceResult track_sequence(std::span<const Frame> frames, const TrackerConfig& cfg) {
  Tracker tracker(cfg);
  for (const auto& f : frames) tracker.step(f);
  return {tracker.tracklets(), tracker.log()};
}

}  // namespace utrack
