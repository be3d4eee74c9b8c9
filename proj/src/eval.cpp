#include "utrack/eval.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "utrack/contrastive.hpp"
#include "utrack/error.hpp"

namespace utrack {

namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

double SeparationReport::wrong_flag_rate() const { return ratio(wrong_flagged_uncertain, wrong_total); }
double SeparationReport::correct_certain_rate() const { return ratio(correct_flagged_certain, correct_total); }

std::string SeparationReport::to_text() const {
  return fmt::format(
      "wrong_total: {}\nwrong_flagged_uncertain: {}\ncorrect_total: {}\ncorrect_flagged_certain: {}\n"
      "wrong_flag_rate: {:.6f}\ncorrect_certain_rate: {:.6f}\n",
      wrong_total, wrong_flagged_uncertain, correct_total, correct_flagged_certain, wrong_flag_rate(),
      correct_certain_rate());
}

SeparationReport SeparationReport::from_text(const std::string& text) {
  SeparationReport r;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto colon = line.find(':');
    if (colon == std::string::npos) continue;
    const std::string key = line.substr(0, colon);
    const std::string value = line.substr(colon + 1);
    std::size_t* slot = key == "wrong_total"               ? &r.wrong_total
                        : key == "wrong_flagged_uncertain" ? &r.wrong_flagged_uncertain
                        : key == "correct_total"           ? &r.correct_total
                        : key == "correct_flagged_certain" ? &r.correct_flagged_certain
                                                           : nullptr;
    if (slot == nullptr) continue;  // derived rates
    try {
      *slot = std::stoull(value);
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, "bad report value for " + key);
    }
  }
  return r;
}

double AccuracyCurve::at(int age) const {
  for (const auto& p : points) {
    if (p.age == age) return p.accuracy;
  }
  return -1.0;
}

AccuracyCurve pseudo_accuracy(std::span<const Tracklet> tracklets, const GroundTruth& gt, int max_age) {
  std::vector<std::size_t> correct(static_cast<std::size_t>(std::max(max_age, 0)) + 1, 0);
  std::vector<std::size_t> total(correct.size(), 0);
  for (const auto& t : tracklets) {
    if (t.records.empty()) continue;
    const int anchor = gt.true_id(t.records.front().frame, t.records.front().det_index);
    const std::size_t limit = std::min(t.records.size(), correct.size());
    for (std::size_t s = 1; s < limit; ++s) {
      total[s] += 1;
      if (gt.true_id(t.records[s].frame, t.records[s].det_index) == anchor) correct[s] += 1;
    }
  }
  AccuracyCurve curve;
  for (std::size_t s = 1; s < total.size(); ++s) {
    if (total[s] == 0) continue;
    curve.points.push_back({static_cast<int>(s), ratio(correct[s], total[s]), total[s]});
  }
  return curve;
}

SeparationReport uncertainty_separation(std::span<const LogRow> log, const GroundTruth& gt,
                                        const std::set<Stage>& stages) {
  std::map<int, int> anchor;  // track id -> birth identity
  for (const auto& row : log) {
    if (row.stage == Stage::Birth) anchor[row.track_id] = gt.true_id(row.frame, row.det_index);
  }
  SeparationReport report;
  for (const auto& row : log) {
    if (row.stage == Stage::Birth || stages.count(row.stage) == 0) continue;
    auto it = anchor.find(row.track_id);
    if (it == anchor.end()) {
      throw Error(ErrorCode::MissingGroundTruth, "log has no birth row for track " + std::to_string(row.track_id));
    }
    const bool wrong = gt.true_id(row.frame, row.det_index) != it->second;
    const bool uncertain = row.delta > 0.0;
    if (wrong) {
      report.wrong_total += 1;
      if (uncertain) report.wrong_flagged_uncertain += 1;
    } else {
      report.correct_total += 1;
      if (!uncertain) report.correct_flagged_certain += 1;
    }
  }
  return report;
}

std::size_t id_switches(std::span<const Tracklet> tracklets, const GroundTruth& gt) {
  // true id -> (frame, tracklet id) observations
  std::map<int, std::vector<std::pair<int, int>>> trajectories;
  for (const auto& t : tracklets) {
    for (const auto& r : t.records) trajectories[gt.true_id(r.frame, r.det_index)].emplace_back(r.frame, t.id);
  }
  std::size_t switches = 0;
  for (auto& [id, obs] : trajectories) {
    std::sort(obs.begin(), obs.end());
    for (std::size_t k = 1; k < obs.size(); ++k) {
      if (obs[k].second != obs[k - 1].second) switches += 1;
    }
  }
  return switches;
}

std::string DeltaSummary::to_text() const {
  std::string out = fmt::format("count: {}\nmean: {:.6f}\nfraction_positive: {:.6f}\nhistogram:", count, mean,
                                fraction_positive);
  for (auto h : histogram) out += fmt::format(" {}", h);
  out += "\n";
  return out;
}

DeltaSummary similarity_delta(std::span<const Frame> frames, const GroundTruth& gt, int bins) {
  DeltaSummary s;
  s.histogram.assign(static_cast<std::size_t>(std::max(bins, 1)), 0);
  double sum = 0.0;
  std::size_t positive = 0;
  for (std::size_t k = 0; k + 1 < frames.size(); ++k) {
    const auto& cur = frames[k].detections;
    const auto& next = frames[k + 1].detections;
    if (next.size() < 2) continue;
    std::vector<int> next_ids;
    for (const auto& d : next) next_ids.push_back(gt.true_id(d.frame, d.det_index));
    for (const auto& d : cur) {
      if (!gt.contains(d.frame, d.det_index)) continue;
      const int id = gt.true_id(d.frame, d.det_index);
      auto match = std::find(next_ids.begin(), next_ids.end(), id);
      if (match == next_ids.end()) continue;
      const auto m = static_cast<std::size_t>(match - next_ids.begin());
      double c_pos = d.embedding.dot(next[m].embedding);
      double c_neg = -INFINITY;
      for (std::size_t j = 0; j < next.size(); ++j) {
        if (j != m) c_neg = std::max(c_neg, d.embedding.dot(next[j].embedding));
      }
      const double delta = c_pos - c_neg;
      sum += delta;
      s.count += 1;
      if (delta > 0.0) positive += 1;
      const double pos = (delta - s.histogram_lo) / (s.histogram_hi - s.histogram_lo);
      const auto bin = static_cast<std::size_t>(
          std::clamp(pos * static_cast<double>(s.histogram.size()), 0.0, double(s.histogram.size() - 1)));
      s.histogram[bin] += 1;
    }
  }
  s.mean = s.count == 0 ? 0.0 : sum / static_cast<double>(s.count);
  s.fraction_positive = ratio(positive, s.count);
  return s;
}

DeltaSummary similarity_delta(const LinearEmbedder& embedder, std::span<const Frame> frames, const GroundTruth& gt,
                              int bins) {
  const auto embedded = embedder.embed_frames(frames);
  return similarity_delta(embedded, gt, bins);
}

std::string curve_to_text(const AccuracyCurve& curve) {
  std::string out = "age,accuracy,total\n";
  for (const auto& p : curve.points) out += fmt::format("{},{:.6f},{}\n", p.age, p.accuracy, p.total);
  return out;
}

}  // namespace utrack
