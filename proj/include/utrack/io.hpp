#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "utrack/contrastive.hpp"
#include "utrack/ground_truth.hpp"
#include "utrack/simulator.hpp"
#include "utrack/tracker.hpp"

namespace utrack::io {

namespace fs = std::filesystem;

/// Writes through a temporary sibling file and renames it into place.
/// Throws IoFailure.
void atomic_write(const fs::path& path, const std::string& content);

std::string read_file(const fs::path& path);

/// MOT-style detections `frame,id,bb_left,bb_top,bb_width,bb_height,conf[,x,y,z]`.
/// The id and trailing fields are ignored. Detection indices follow line order
/// within each frame. Frames without detections are not represented.
/// Throws ParseError / NonPositiveSize with the line number.
std::vector<Frame> read_detections(const fs::path& path);
std::vector<Frame> parse_detections(const std::string& text);
std::string format_detections(std::span<const Frame> frames);

struct EmbeddingLoad {
  std::size_t renormalized = 0;  // rows whose norm was off by more than 1e-6
};

/// Attaches `frame,det_index,v1,...,vD` rows as unit vectors. Throws
/// MissingEmbedding, DuplicateEmbedding, DimensionMismatch, ParseError.
EmbeddingLoad read_embeddings(const fs::path& path, std::vector<Frame>& frames);
EmbeddingLoad parse_embeddings(const std::string& text, std::vector<Frame>& frames);
std::string format_embeddings(std::span<const Frame> frames);

/// Same row layout as embeddings, stored without normalization.
void read_features(const fs::path& path, std::vector<Frame>& frames);
std::string format_features(std::span<const Frame> frames);

/// `frame,det_index,true_id` rows.
std::vector<GroundTruthRecord> read_ground_truth(const fs::path& path);
std::string format_ground_truth(std::span<const GroundTruthRecord> records);

/// One MOT-style line per tracklet record, sorted by (frame, id):
/// `frame,id,bb_left,bb_top,bb_width,bb_height,conf,det_index,-1,-1`.
/// The eighth column carries the source detection index so results can be
/// joined with ground truth.
std::string format_results(std::span<const Tracklet> tracklets);
void write_results(std::span<const Tracklet> tracklets, const fs::path& path);
std::vector<Tracklet> read_results(const fs::path& path);

/// `frame,det_index,track_id,c1,c2,sigma,gamma,delta,stage` rows.
std::string format_log(std::span<const LogRow> log);
std::vector<LogRow> read_log(const fs::path& path);

/// Header `F D`, then F rows of D coefficients.
std::string format_weights(const LinearEmbedder& embedder);
LinearEmbedder read_weights(const fs::path& path);

/// Flat `key = value` lines with `#` comments. Throws ParseError.
std::map<std::string, std::string> parse_key_values(const std::string& text);

/// Unknown keys and malformed values raise InvalidConfig.
ScenarioConfig scenario_from_text(const std::string& text);
std::string scenario_to_text(const ScenarioConfig& cfg);

}  // namespace utrack::io
