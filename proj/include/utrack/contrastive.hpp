#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "utrack/rng.hpp"
#include "utrack/tracker.hpp"

namespace utrack {

/// One query against a positive key and a set of negative keys. All vectors
/// share a dimension and are unit norm.
struct ContrastiveBatch {
  Embedding query;
  Embedding positive;
  std::vector<Embedding> negatives;
  double temperature = 0.07;
};

/// -log softmax of the positive logit among {positive, negatives}, with
/// logits q.k / temperature.
double info_nce(const ContrastiveBatch& batch);

/// Gradient of info_nce with respect to the query: (sum_i p_i k_i - k+) / temperature.
Embedding info_nce_grad(const ContrastiveBatch& batch);

/// Linear projection followed by l2 normalization; the desk-scale stand-in for
/// an appearance encoder.
class LinearEmbedder {
 public:
  explicit LinearEmbedder(Eigen::MatrixXd weights);

  /// Entries i.i.d. uniform in [-1/sqrt(F), 1/sqrt(F)], drawn row by row.
  static LinearEmbedder random(int input_dim, int output_dim, Rng& rng);

  int input_dim() const { return static_cast<int>(weights_.rows()); }
  int output_dim() const { return static_cast<int>(weights_.cols()); }
  const Eigen::MatrixXd& weights() const { return weights_; }
  Eigen::MatrixXd& weights() { return weights_; }

  /// Throws DimensionMismatch.
  Embedding embed(const Eigen::VectorXd& features) const;

  /// Copies of `frames` whose embeddings are recomputed from raw features.
  std::vector<Frame> embed_frames(std::span<const Frame> frames) const;

 private:
  Eigen::MatrixXd weights_;  // F x D
};

struct TrainConfig {
  int epochs = 20;
  double lr = 0.05;
  int batch_size = 1;       // frame pairs per SGD update
  int pairs_per_epoch = 0;  // 0: one pair per frame
  int max_offset = 10;      // largest frame gap of a training pair
  double temperature = 0.07;
  bool guided_anchors = true;  // uncertainty-guided anchor sampling; uniform frame pairs otherwise
  std::uint64_t seed = 7;
  TrackerConfig tracker;

  void validate() const;
};

struct TrainResult {
  LinearEmbedder embedder;
  std::vector<double> epoch_loss;  // mean loss per contrastive term
};

/// Pseudo-label driven contrastive training of a linear embedder. Every epoch
/// re-embeds the sequence, re-tracks it, then runs SGD on frame pairs. Keys
/// are treated as constants; gradients flow through the query only. Throws
/// InsufficientData when tracking yields fewer than 2 tracklets.
TrainResult train_embedder(std::span<const Frame> frames, const TrainConfig& cfg);

}  // namespace utrack
