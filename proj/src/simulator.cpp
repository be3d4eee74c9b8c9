#include "utrack/simulator.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>

#include "utrack/error.hpp"
#include "utrack/rng.hpp"

namespace utrack {

GroundTruth::GroundTruth(std::span<const GroundTruthRecord> records) {
  for (const auto& r : records) ids_[{r.frame, r.det_index}] = r.true_id;
}

int GroundTruth::true_id(int frame, int det_index) const {
  auto it = ids_.find({frame, det_index});
  if (it == ids_.end()) {
    throw Error(ErrorCode::MissingGroundTruth,
                "no ground truth for frame " + std::to_string(frame) + ", detection " + std::to_string(det_index));
  }
  return it->second;
}

void ScenarioConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw Error(ErrorCode::InvalidConfig, field + " " + why);
  };
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (num_objects < 1) fail("num_objects", "must be at least 1");
  if (num_frames < 2) fail("num_frames", "must be at least 2");
  if (!(arena_width > 0.0 && std::isfinite(arena_width))) fail("arena_width", "must be positive");
  if (!(arena_height > 0.0 && std::isfinite(arena_height))) fail("arena_height", "must be positive");
  if (embed_dim < 2) fail("embed_dim", "must be at least 2");
  if (raw_dim < 2) fail("raw_dim", "must be at least 2");
  if (raw_dim < embed_dim) fail("raw_dim", "must be at least embed_dim");
  if (!(appearance_noise >= 0.0 && std::isfinite(appearance_noise))) fail("appearance_noise", "must be >= 0");
  if (!in_unit(confusable_fraction)) fail("confusable_fraction", "must lie in [0, 1]");
  if (!in_unit(occlusion_rate)) fail("occlusion_rate", "must lie in [0, 1]");
  if (!(occlusion_noise_boost >= 1.0 && std::isfinite(occlusion_noise_boost))) {
    fail("occlusion_noise_boost", "must be >= 1");
  }
  if (!in_unit(dropout)) fail("dropout", "must lie in [0, 1]");
  if (!(camera_drift >= 0.0 && std::isfinite(camera_drift))) fail("camera_drift", "must be >= 0");
  if (!(speed >= 0.0 && std::isfinite(speed))) fail("speed", "must be >= 0");
}

namespace {

// Box sizes and motion jitter are fixed properties of the synthetic scene.
constexpr double kMinWidth = 28.0;
constexpr double kMaxWidth = 44.0;
constexpr double kMinAspect = 2.0;
constexpr double kMaxAspect = 2.6;
constexpr double kMotionNoise = 0.3;          // px per axis per frame
constexpr double kConfusablePerturbation = 0.2;   // expected norm of the twin latent offset
constexpr double kOcclusionIou = 0.3;

struct Object {
  Eigen::VectorXd latent;
  double cx, cy, w, h, vx, vy;
};

Eigen::VectorXd gaussian_vector(Rng& rng, int n, double stddev) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v(i) = stddev * rng.normal();
  return v;
}

// F x D matrix with orthonormal columns: Gaussian fill (column by column)
// followed by modified Gram-Schmidt.
Eigen::MatrixXd random_rotation(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd q(rows, cols);
  for (int c = 0; c < cols; ++c) q.col(c) = gaussian_vector(rng, rows, 1.0);
  for (int c = 0; c < cols; ++c) {
    for (int k = 0; k < c; ++k) q.col(c) -= q.col(k).dot(q.col(c)) * q.col(k);
    q.col(c).normalize();
  }
  return q;
}

void reflect(double& pos, double& vel, double half, double limit) {
  if (pos < half) {
    pos = 2.0 * half - pos;
    vel = -vel;
  } else if (pos > limit - half) {
    pos = 2.0 * (limit - half) - pos;
    vel = -vel;
  }
}

}  // namespace

SimulatedScenario generate(const ScenarioConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  const int d = cfg.embed_dim;
  const int f = cfg.raw_dim;

  const Eigen::MatrixXd rotation = random_rotation(rng, f, d);

  std::vector<Object> objects(static_cast<std::size_t>(cfg.num_objects));
  for (auto& o : objects) {
    o.latent = gaussian_vector(rng, d, 1.0);
    o.latent.normalize();
    o.w = rng.uniform(kMinWidth, kMaxWidth);
    o.h = o.w * rng.uniform(kMinAspect, kMaxAspect);
    o.w = std::min(o.w, cfg.arena_width);
    o.h = std::min(o.h, cfg.arena_height);
    o.cx = rng.uniform(o.w / 2.0, cfg.arena_width - o.w / 2.0);
    o.cy = rng.uniform(o.h / 2.0, cfg.arena_height - o.h / 2.0);
    const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
    o.vx = cfg.speed * std::cos(heading);
    o.vy = cfg.speed * std::sin(heading);
  }

  // Twins: objects (2k, 2k+1) for k < round(fraction * N / 2).
  const auto pairs = static_cast<std::size_t>(std::lround(cfg.confusable_fraction * cfg.num_objects / 2.0));
  for (std::size_t k = 0; k < pairs && 2 * k + 1 < objects.size(); ++k) {
    const Eigen::VectorXd offset = gaussian_vector(rng, d, kConfusablePerturbation / std::sqrt(double(d)));
    objects[2 * k + 1].latent = (objects[2 * k].latent + offset).normalized();
  }

  SimulatedScenario out;
  double drift_x = 0.0, drift_y = 0.0;
  // sigma_a is the expected norm of the noise vector, hence the 1/sqrt(dim).
  const double latent_sigma = cfg.appearance_noise / std::sqrt(double(d));
  const double raw_sigma = cfg.appearance_noise / std::sqrt(double(f));
  for (int t = 1; t <= cfg.num_frames; ++t) {
    if (t > 1) {
      const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
      drift_x += cfg.camera_drift * std::cos(phi);
      drift_y += cfg.camera_drift * std::sin(phi);
      for (auto& o : objects) {
        o.cx += o.vx + kMotionNoise * rng.normal();
        o.cy += o.vy + kMotionNoise * rng.normal();
        reflect(o.cx, o.vx, o.w / 2.0, cfg.arena_width);
        reflect(o.cy, o.vy, o.h / 2.0, cfg.arena_height);
      }
    }

    std::vector<BoundingBox> boxes;
    for (const auto& o : objects) boxes.push_back({o.cx + drift_x, o.cy + drift_y, o.w, o.h});
    std::vector<double> max_overlap(objects.size(), 0.0);
    for (std::size_t i = 0; i < objects.size(); ++i) {
      for (std::size_t j = i + 1; j < objects.size(); ++j) {
        const double v = iou(boxes[i], boxes[j]);
        max_overlap[i] = std::max(max_overlap[i], v);
        max_overlap[j] = std::max(max_overlap[j], v);
      }
    }

    Frame frame{t, {}};
    std::vector<int> ids;
    for (std::size_t i = 0; i < objects.size(); ++i) {
      const bool occluded = rng.uniform() < cfg.occlusion_rate || max_overlap[i] > kOcclusionIou;
      const double boost = occluded ? cfg.occlusion_noise_boost : 1.0;
      const Eigen::VectorXd noisy = objects[i].latent + gaussian_vector(rng, d, latent_sigma * boost);
      const Eigen::VectorXd raw = rotation * noisy + gaussian_vector(rng, f, raw_sigma);
      const bool dropped = rng.uniform() < cfg.dropout;
      if (dropped) continue;
      Detection det;
      det.frame = t;
      det.box = boxes[i];
      det.confidence = 1.0 - std::min(0.9, max_overlap[i]);
      det.embedding = noisy.normalized();
      det.features = raw;
      frame.detections.push_back(std::move(det));
      ids.push_back(static_cast<int>(i) + 1);
    }
    // Fisher-Yates so detection order carries no identity information.
    for (std::size_t i = frame.detections.size(); i > 1; --i) {
      const std::size_t j = rng.index(i);
      std::swap(frame.detections[i - 1], frame.detections[j]);
      std::swap(ids[i - 1], ids[j]);
    }
    for (std::size_t k = 0; k < frame.detections.size(); ++k) {
      frame.detections[k].det_index = static_cast<int>(k);
      out.ground_truth.push_back({t, static_cast<int>(k), ids[k]});
    }
    out.frames.push_back(std::move(frame));
  }
  return out;
}

}  // namespace utrack
