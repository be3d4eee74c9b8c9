#include "utrack/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "utrack/error.hpp"
#include "utrack/tga.hpp"

namespace utrack {

namespace {

struct LossTerms {
  double loss = 0.0;
  Embedding grad;
};

// Shared evaluation of loss and query gradient. Index 0 of the softmax is
// the positive key.
LossTerms evaluate(const ContrastiveBatch& b) {
  const double inv_t = 1.0 / b.temperature;
  std::vector<double> logits;
  logits.reserve(b.negatives.size() + 1);
  logits.push_back(b.query.dot(b.positive) * inv_t);
  for (const auto& k : b.negatives) logits.push_back(b.query.dot(k) * inv_t);
  const double top = *std::max_element(logits.begin(), logits.end());
  const double positive = logits[0] - top;
  double sum = 0.0;
  for (double& l : logits) {
    l = std::exp(l - top);
    sum += l;
  }
  LossTerms out;
  out.loss = std::log(sum) - positive;
  out.grad = (logits[0] / sum - 1.0) * b.positive;
  for (std::size_t i = 0; i < b.negatives.size(); ++i) out.grad += (logits[i + 1] / sum) * b.negatives[i];
  out.grad *= inv_t;
  return out;
}

}  // namespace

double info_nce(const ContrastiveBatch& batch) { return std::max(0.0, evaluate(batch).loss); }

Embedding info_nce_grad(const ContrastiveBatch& batch) { return evaluate(batch).grad; }

LinearEmbedder::LinearEmbedder(Eigen::MatrixXd weights) : weights_(std::move(weights)) {}

LinearEmbedder LinearEmbedder::random(int input_dim, int output_dim, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(input_dim));
  Eigen::MatrixXd w(input_dim, output_dim);
  for (int r = 0; r < input_dim; ++r) {
    for (int c = 0; c < output_dim; ++c) w(r, c) = rng.uniform(-bound, bound);
  }
  return LinearEmbedder(std::move(w));
}

Embedding LinearEmbedder::embed(const Eigen::VectorXd& features) const {
  if (features.size() != weights_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "embedder expects " + std::to_string(weights_.rows()) +
                                                  " features, got " + std::to_string(features.size()));
  }
  Embedding u = weights_.transpose() * features;
  const double norm = u.norm();
  if (norm > 0.0) u /= norm;
  return u;
}

std::vector<Frame> LinearEmbedder::embed_frames(std::span<const Frame> frames) const {
  std::vector<Frame> out(frames.begin(), frames.end());
  for (auto& f : out) {
    for (auto& d : f.detections) d.embedding = embed(d.features);
  }
  return out;
}

void TrainConfig::validate() const {
  if (epochs < 0) throw Error(ErrorCode::InvalidConfig, "epochs must be non-negative");
  if (!(lr >= 0.0 && std::isfinite(lr))) throw Error(ErrorCode::InvalidConfig, "lr must be non-negative");
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch_size must be at least 1");
  if (pairs_per_epoch < 0) throw Error(ErrorCode::InvalidConfig, "pairs_per_epoch must be non-negative");
  if (max_offset < 1) throw Error(ErrorCode::InvalidConfig, "max_offset must be at least 1");
  if (!(temperature > 0.0)) throw Error(ErrorCode::InvalidConfig, "temperature must be positive");
  tracker.validate();
}

namespace {

// Which pseudo-tracklet owns each detection, per frame position.
struct Ownership {
  std::vector<std::vector<int>> owner;  // [frame position][detection position] -> tracklet index or -1
  std::map<int, std::size_t> position;  // frame index -> frame position
};

Ownership ownership(std::span<const Frame> frames, std::span<const Tracklet> tracklets) {
  Ownership o;
  o.owner.resize(frames.size());
  for (std::size_t p = 0; p < frames.size(); ++p) {
    o.position[frames[p].index] = p;
    o.owner[p].assign(frames[p].detections.size(), -1);
  }
  for (std::size_t t = 0; t < tracklets.size(); ++t) {
    for (const auto& r : tracklets[t].records) {
      auto& row = o.owner[o.position.at(r.frame)];
      for (std::size_t k = 0; k < frames[o.position.at(r.frame)].detections.size(); ++k) {
        if (frames[o.position.at(r.frame)].detections[k].det_index == r.det_index) row[k] = static_cast<int>(t);
      }
    }
  }
  return o;
}

}  // namespace

TrainResult train_embedder(std::span<const Frame> frames, const TrainConfig& cfg) {
  cfg.validate();
  if (frames.size() < 2 || frames.front().detections.empty()) {
    throw Error(ErrorCode::InsufficientData, "training needs at least 2 frames and detections in the first");
  }
  const auto feature_dim = frames.front().detections.front().features.size();
  const auto embed_dim = frames.front().detections.front().embedding.size();
  if (feature_dim == 0 || embed_dim == 0) {
    throw Error(ErrorCode::InsufficientData, "training needs raw features and reference embeddings");
  }

  Rng rng(cfg.seed);
  TrainResult result{LinearEmbedder::random(static_cast<int>(feature_dim), static_cast<int>(embed_dim), rng), {}};
  Eigen::MatrixXd& weights = result.embedder.weights();

  const std::size_t pairs = cfg.pairs_per_epoch > 0 ? static_cast<std::size_t>(cfg.pairs_per_epoch) : frames.size();
  const std::size_t steps_per_epoch = (pairs + static_cast<std::size_t>(cfg.batch_size) - 1) /
                                      static_cast<std::size_t>(cfg.batch_size);
  const double total_steps = static_cast<double>(steps_per_epoch) * cfg.epochs;
  std::size_t step = 0;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto embedded = result.embedder.embed_frames(frames);
    const auto tracked = track_sequence(embedded, cfg.tracker);
    if (tracked.tracklets.size() < 2) {
      throw Error(ErrorCode::InsufficientData,
                  "pseudo-labeling produced " + std::to_string(tracked.tracklets.size()) + " tracklet(s)");
    }
    const Ownership own = ownership(frames, tracked.tracklets);

    double loss_sum = 0.0;
    std::size_t loss_terms = 0;
    Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(weights.rows(), weights.cols());
    std::size_t grad_queries = 0;
    std::size_t pending_pairs = 0;

    auto apply_update = [&] {
      const double lr = 0.5 * cfg.lr * (1.0 + std::cos(std::numbers::pi * static_cast<double>(step) / total_steps));
      if (grad_queries > 0) weights -= (lr / static_cast<double>(grad_queries)) * grad;
      grad.setZero();
      grad_queries = 0;
      pending_pairs = 0;
      ++step;
    };

    for (std::size_t p = 0; p < pairs; ++p) {
      std::size_t cur = 1 + rng.index(frames.size() - 1);
      std::size_t hist = 0;
      const Frame& frame = frames[cur];
      std::vector<Detection> current = result.embedder.embed_frames(std::span(&frame, 1)).front().detections;
      std::vector<Detection> augmented;
      if (cfg.guided_anchors) {
        try {
          const auto source = source_anchor_weights(tracked.tracklets, frame.index);
          const int anchor_id = sample(source, rng);
          const Tracklet& anchor = tracked.tracklets[static_cast<std::size_t>(anchor_id - 1)];
          const int target = sample(target_anchor_weights(anchor, frame.index, cfg.max_offset), rng);
          hist = own.position.at(target);
          const auto plan =
              build_plan(anchor, frame.index, target, default_jitter(anchor.at_frame(frame.index)->box), rng);
          augmented = augment_detections(current, plan);
        } catch (const Error&) {
          // No anchor with usable history at this frame.
          if (++pending_pairs == static_cast<std::size_t>(cfg.batch_size)) apply_update();
          continue;
        }
      } else {
        const std::size_t offset = 1 + rng.index(std::min<std::size_t>(static_cast<std::size_t>(cfg.max_offset), cur));
        hist = cur - offset;
        augmented = current;
      }
      const auto history = result.embedder.embed_frames(std::span(&frames[hist], 1)).front().detections;

      // tracklet index -> detection position in the historical frame
      std::map<int, std::size_t> hist_of;
      for (std::size_t k = 0; k < history.size(); ++k) {
        if (own.owner[hist][k] >= 0) hist_of[own.owner[hist][k]] = k;
      }

      for (std::size_t k = 0; k < current.size(); ++k) {
        const int owner = own.owner[cur][k];
        auto matched = hist_of.find(owner);
        if (owner < 0 || matched == hist_of.end()) continue;

        std::vector<Embedding> negatives;
        for (std::size_t j = 0; j < history.size(); ++j) {
          if (own.owner[hist][j] >= 0 && own.owner[hist][j] != owner) negatives.push_back(history[j].embedding);
        }
        std::vector<Embedding> augmented_negatives;
        for (std::size_t j = 0; j < augmented.size(); ++j) {
          if (own.owner[cur][j] >= 0 && own.owner[cur][j] != owner) {
            augmented_negatives.push_back(augmented[j].embedding);
          }
        }
        if (negatives.empty() && augmented_negatives.empty()) continue;

        const Embedding& q = current[k].embedding;
        const ContrastiveBatch historical{q, history[matched->second].embedding, negatives, cfg.temperature};
        const ContrastiveBatch self{q, augmented[k].embedding, augmented_negatives, cfg.temperature};
        const LossTerms a = evaluate(historical);
        const LossTerms b = evaluate(self);
        loss_sum += a.loss + b.loss;
        loss_terms += 2;

        // Back through the normalization: dL/du = (I - q q^T) dL/dq / |u|.
        const Eigen::VectorXd& x = frame.detections[k].features;
        const Eigen::VectorXd u = weights.transpose() * x;
        const Embedding gq = a.grad + b.grad;
        const Eigen::VectorXd gu = (gq - q * q.dot(gq)) / u.norm();
        grad += x * gu.transpose();
        ++grad_queries;
      }
      if (++pending_pairs == static_cast<std::size_t>(cfg.batch_size)) apply_update();
    }
    if (pending_pairs > 0) apply_update();
    result.epoch_loss.push_back(loss_terms == 0 ? 0.0 : loss_sum / static_cast<double>(loss_terms));
  }
  return result;
}

}  // namespace utrack
