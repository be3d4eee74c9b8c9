#include "utrack/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <system_error>

#include "utrack/error.hpp"

namespace utrack::io {

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(trim(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    parse_fail(line, "expected a number, got '" + std::string(s) + "'");
  }
  return v;
}

long long to_int(std::string_view s, std::size_t line) {
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    parse_fail(line, "expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

// Calls fn(line_number, fields) for every non-blank line.
void for_each_row(const std::string& text, const std::function<void(std::size_t, std::vector<std::string_view>)>& fn) {
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    ++line_no;
    const auto line = trim(std::string_view(text).substr(start, end - start));
    if (!line.empty()) fn(line_no, split(line, ','));
    start = end + 1;
  }
}

std::string key_of(int frame, int det) { return "(frame " + std::to_string(frame) + ", detection " + std::to_string(det) + ")"; }

Detection* find_detection(std::vector<Frame>& frames, int frame, int det_index) {
  auto it = std::lower_bound(frames.begin(), frames.end(), frame,
                             [](const Frame& f, int idx) { return f.index < idx; });
  if (it == frames.end() || it->index != frame) return nullptr;
  if (det_index < 0 || static_cast<std::size_t>(det_index) >= it->detections.size()) return nullptr;
  return &it->detections[static_cast<std::size_t>(det_index)];
}

// Shared parser of `frame,det_index,v1..vD` rows; returns vectors keyed by detection.
template <typename Attach>
void parse_vector_rows(const std::string& text, std::vector<Frame>& frames, Attach attach) {
  std::vector<std::vector<bool>> seen;
  for (const auto& f : frames) seen.emplace_back(f.detections.size(), false);
  std::optional<std::size_t> dim;
  for_each_row(text, [&](std::size_t line, std::vector<std::string_view> fields) {
    if (fields.size() < 3) parse_fail(line, "expected frame,det_index,v1,...");
    const int frame = static_cast<int>(to_int(fields[0], line));
    const int det = static_cast<int>(to_int(fields[1], line));
    const std::size_t d = fields.size() - 2;
    if (dim && *dim != d) {
      throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(line) + ": vector has " +
                                                    std::to_string(d) + " entries, expected " + std::to_string(*dim));
    }
    dim = d;
    Detection* target = find_detection(frames, frame, det);
    if (target == nullptr) parse_fail(line, "no detection " + key_of(frame, det));
    const auto frame_pos = static_cast<std::size_t>(
        std::lower_bound(frames.begin(), frames.end(), frame, [](const Frame& f, int i) { return f.index < i; }) -
        frames.begin());
    auto slot = seen[frame_pos][static_cast<std::size_t>(det)];
    if (slot) throw Error(ErrorCode::DuplicateEmbedding, key_of(frame, det));
    slot = true;
    Eigen::VectorXd v(static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < d; ++i) v(static_cast<Eigen::Index>(i)) = to_double(fields[i + 2], line);
    attach(line, *target, std::move(v));
  });
  for (std::size_t p = 0; p < frames.size(); ++p) {
    for (std::size_t k = 0; k < frames[p].detections.size(); ++k) {
      if (!seen[p][k]) throw Error(ErrorCode::MissingEmbedding, key_of(frames[p].index, static_cast<int>(k)));
    }
  }
}

std::string vector_rows(std::span<const Frame> frames, const std::function<const Eigen::VectorXd&(const Detection&)>& get) {
  std::string out;
  for (const auto& f : frames) {
    for (const auto& d : f.detections) {
      out += fmt::format("{},{}", f.index, d.det_index);
      for (double v : get(d)) out += fmt::format(",{:.6f}", v);
      out += '\n';
    }
  }
  return out;
}

}  // namespace

void atomic_write(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, "write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<Frame> parse_detections(const std::string& text) {
  std::map<int, Frame> frames;
  for_each_row(text, [&](std::size_t line, std::vector<std::string_view> fields) {
    if (fields.size() < 7 || fields.size() > 10) parse_fail(line, "expected 7 to 10 comma-separated fields");
    const long long frame = to_int(fields[0], line);
    if (frame < 1) parse_fail(line, "frame index must be positive");
    const double left = to_double(fields[2], line);
    const double top = to_double(fields[3], line);
    const double w = to_double(fields[4], line);
    const double h = to_double(fields[5], line);
    const double conf = to_double(fields[6], line);
    if (!(w > 0.0) || !(h > 0.0)) {
      throw Error(ErrorCode::NonPositiveSize, "line " + std::to_string(line) + ": box width and height must be positive");
    }
    Frame& f = frames[static_cast<int>(frame)];
    f.index = static_cast<int>(frame);
    Detection d;
    d.frame = f.index;
    d.det_index = static_cast<int>(f.detections.size());
    d.box = BoundingBox::from_corners(left, top, w, h);
    d.confidence = conf;
    f.detections.push_back(std::move(d));
  });
  std::vector<Frame> out;
  for (auto& [idx, f] : frames) out.push_back(std::move(f));
  return out;
}

std::vector<Frame> read_detections(const fs::path& path) { return parse_detections(read_file(path)); }

std::string format_detections(std::span<const Frame> frames) {
  std::string out;
  for (const auto& f : frames) {
    for (const auto& d : f.detections) {
      out += fmt::format("{},-1,{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},-1,-1,-1\n", f.index, d.box.left(), d.box.top(),
                         d.box.w, d.box.h, d.confidence);
    }
  }
  return out;
}

EmbeddingLoad parse_embeddings(const std::string& text, std::vector<Frame>& frames) {
  EmbeddingLoad load;
  parse_vector_rows(text, frames, [&](std::size_t line, Detection& d, Eigen::VectorXd v) {
    const double norm = v.norm();
    if (!(norm > 0.0)) parse_fail(line, "embedding has zero norm");
    if (std::abs(norm - 1.0) > 1e-6) {
      v /= norm;
      ++load.renormalized;
    }
    d.embedding = std::move(v);
  });
  return load;
}

EmbeddingLoad read_embeddings(const fs::path& path, std::vector<Frame>& frames) {
  return parse_embeddings(read_file(path), frames);
}

std::string format_embeddings(std::span<const Frame> frames) {
  return vector_rows(frames, [](const Detection& d) -> const Eigen::VectorXd& { return d.embedding; });
}

void read_features(const fs::path& path, std::vector<Frame>& frames) {
  parse_vector_rows(read_file(path), frames,
                    [](std::size_t, Detection& d, Eigen::VectorXd v) { d.features = std::move(v); });
}

std::string format_features(std::span<const Frame> frames) {
  return vector_rows(frames, [](const Detection& d) -> const Eigen::VectorXd& { return d.features; });
}

std::vector<GroundTruthRecord> read_ground_truth(const fs::path& path) {
  std::vector<GroundTruthRecord> out;
  for_each_row(read_file(path), [&](std::size_t line, std::vector<std::string_view> fields) {
    if (fields.size() != 3) parse_fail(line, "expected frame,det_index,true_id");
    out.push_back({static_cast<int>(to_int(fields[0], line)), static_cast<int>(to_int(fields[1], line)),
                   static_cast<int>(to_int(fields[2], line))});
  });
  return out;
}

std::string format_ground_truth(std::span<const GroundTruthRecord> records) {
  std::string out;
  for (const auto& r : records) out += fmt::format("{},{},{}\n", r.frame, r.det_index, r.true_id);
  return out;
}

std::string format_results(std::span<const Tracklet> tracklets) {
  struct Line {
    int frame, id;
    const TrackRecord* rec;
  };
  std::vector<Line> lines;
  for (const auto& t : tracklets) {
    for (const auto& r : t.records) lines.push_back({r.frame, t.id, &r});
  }
  std::sort(lines.begin(), lines.end(),
            [](const Line& a, const Line& b) { return std::tie(a.frame, a.id) < std::tie(b.frame, b.id); });
  std::string out;
  for (const auto& l : lines) {
    const auto& b = l.rec->box;
    out += fmt::format("{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{},-1,-1\n", l.frame, l.id, b.left(), b.top(), b.w,
                       b.h, l.rec->confidence, l.rec->det_index);
  }
  return out;
}

void write_results(std::span<const Tracklet> tracklets, const fs::path& path) {
  atomic_write(path, format_results(tracklets));
}

std::vector<Tracklet> read_results(const fs::path& path) {
  std::map<int, Tracklet> by_id;
  for_each_row(read_file(path), [&](std::size_t line, std::vector<std::string_view> fields) {
    if (fields.size() != 10) parse_fail(line, "expected 10 comma-separated fields");
    const int id = static_cast<int>(to_int(fields[1], line));
    TrackRecord r;
    r.frame = static_cast<int>(to_int(fields[0], line));
    r.box = BoundingBox::from_corners(to_double(fields[2], line), to_double(fields[3], line),
                                      to_double(fields[4], line), to_double(fields[5], line));
    if (!r.box.valid()) throw Error(ErrorCode::NonPositiveSize, "line " + std::to_string(line));
    r.confidence = to_double(fields[6], line);
    r.det_index = static_cast<int>(to_int(fields[7], line));
    Tracklet& t = by_id[id];
    t.id = id;
    if (!t.records.empty() && t.records.back().frame >= r.frame) {
      parse_fail(line, "track " + std::to_string(id) + " repeats or reorders frame " + std::to_string(r.frame));
    }
    t.records.push_back(std::move(r));
  });
  std::vector<Tracklet> out;
  for (auto& [id, t] : by_id) out.push_back(std::move(t));
  return out;
}

std::string format_log(std::span<const LogRow> log) {
  std::string out;
  for (const auto& r : log) {
    out += fmt::format("{},{},{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{}\n", r.frame, r.det_index, r.track_id, r.c1,
                       r.c2, r.sigma, r.gamma, r.delta, static_cast<int>(r.stage));
  }
  return out;
}

std::vector<LogRow> read_log(const fs::path& path) {
  std::vector<LogRow> out;
  for_each_row(read_file(path), [&](std::size_t line, std::vector<std::string_view> f) {
    if (f.size() != 9) parse_fail(line, "expected 9 comma-separated fields");
    const auto stage = to_int(f[8], line);
    if (stage < 0 || stage > 2) parse_fail(line, "stage must be 0, 1 or 2");
    out.push_back({static_cast<int>(to_int(f[0], line)), static_cast<int>(to_int(f[1], line)),
                   static_cast<int>(to_int(f[2], line)), to_double(f[3], line), to_double(f[4], line),
                   to_double(f[5], line), to_double(f[6], line), to_double(f[7], line), static_cast<Stage>(stage)});
  });
  return out;
}

std::string format_weights(const LinearEmbedder& embedder) {
  const auto& w = embedder.weights();
  std::string out = fmt::format("{} {}\n", w.rows(), w.cols());
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
      if (c > 0) out += ' ';
      out += fmt::format("{:.17g}", w(r, c));
    }
    out += '\n';
  }
  return out;
}

LinearEmbedder read_weights(const fs::path& path) {
  std::istringstream in(read_file(path));
  long long rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 1 || cols < 1) parse_fail(1, "expected header 'F D'");
  Eigen::MatrixXd w(rows, cols);
  std::string token;
  for (long long i = 0; i < rows * cols; ++i) {
    if (!(in >> token)) parse_fail(2, "expected " + std::to_string(rows * cols) + " coefficients");
    w(i / cols, i % cols) = to_double(token, static_cast<std::size_t>(2 + i / cols));
  }
  if (in >> token) parse_fail(static_cast<std::size_t>(2 + rows), "trailing data after coefficients");
  return LinearEmbedder(std::move(w));
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const auto content = trim(std::string_view(raw).substr(0, hash));
    if (content.empty()) continue;
    const auto eq = content.find('=');
    if (eq == std::string_view::npos) parse_fail(line, "expected 'key = value'");
    const std::string key(trim(content.substr(0, eq)));
    const std::string value(trim(content.substr(eq + 1)));
    if (key.empty() || value.empty()) parse_fail(line, "expected 'key = value'");
    if (out.count(key) != 0) parse_fail(line, "duplicate key '" + key + "'");
    out[key] = value;
  }
  return out;
}

ScenarioConfig scenario_from_text(const std::string& text) {
  ScenarioConfig cfg;
  std::map<std::string, std::function<void(const std::string&)>> setters;
  auto real = [](double& field) {
    return [&field](const std::string& v) { field = to_double(v, 0); };
  };
  auto count = [](int& field) {
    return [&field](const std::string& v) { field = static_cast<int>(to_int(v, 0)); };
  };
  setters["num_objects"] = count(cfg.num_objects);
  setters["num_frames"] = count(cfg.num_frames);
  setters["arena_width"] = real(cfg.arena_width);
  setters["arena_height"] = real(cfg.arena_height);
  setters["embed_dim"] = count(cfg.embed_dim);
  setters["raw_dim"] = count(cfg.raw_dim);
  setters["appearance_noise"] = real(cfg.appearance_noise);
  setters["confusable_fraction"] = real(cfg.confusable_fraction);
  setters["occlusion_rate"] = real(cfg.occlusion_rate);
  setters["occlusion_noise_boost"] = real(cfg.occlusion_noise_boost);
  setters["dropout"] = real(cfg.dropout);
  setters["camera_drift"] = real(cfg.camera_drift);
  setters["speed"] = real(cfg.speed);
  setters["seed"] = [&cfg](const std::string& v) {
    const auto s = to_int(v, 0);
    if (s < 0) throw Error(ErrorCode::InvalidConfig, "seed must be non-negative");
    cfg.seed = static_cast<std::uint64_t>(s);
  };
  for (const auto& [key, value] : parse_key_values(text)) {
    auto it = setters.find(key);
    if (it == setters.end()) throw Error(ErrorCode::InvalidConfig, "unknown key '" + key + "'");
    try {
      it->second(value);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ParseError) throw;
      throw Error(ErrorCode::InvalidConfig, key + " has malformed value '" + value + "'");
    }
  }
  cfg.validate();
  return cfg;
}

std::string scenario_to_text(const ScenarioConfig& c) {
  return fmt::format(
      "num_objects = {}\nnum_frames = {}\narena_width = {:.6f}\narena_height = {:.6f}\nembed_dim = {}\nraw_dim = {}\n"
      "appearance_noise = {:.6f}\nconfusable_fraction = {:.6f}\nocclusion_rate = {:.6f}\n"
      "occlusion_noise_boost = {:.6f}\ndropout = {:.6f}\ncamera_drift = {:.6f}\nspeed = {:.6f}\nseed = {}\n",
      c.num_objects, c.num_frames, c.arena_width, c.arena_height, c.embed_dim, c.raw_dim, c.appearance_noise,
      c.confusable_fraction, c.occlusion_rate, c.occlusion_noise_boost, c.dropout, c.camera_drift, c.speed, c.seed);
}

}  // namespace utrack::io
