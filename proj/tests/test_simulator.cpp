#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "utrack/error.hpp"
#include "utrack/io.hpp"
#include "utrack/simulator.hpp"

namespace utrack {
namespace {

TEST(Rng, PinnedSequence) {
  // First mt19937_64 output for seed 5489 is fixed by the standard.
  Rng rng(5489);
  EXPECT_EQ(rng.next(), 14514284786278117030ull);
  Rng u(5489);
  EXPECT_DOUBLE_EQ(u.uniform(), static_cast<double>(14514284786278117030ull >> 11) * 0x1.0p-53);
}

TEST(Rng, NormalMoments) {
  Rng rng(3);
  double sum = 0.0, sq = 0.0;
  constexpr int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.01);
  EXPECT_NEAR(sq / n, 1.0, 0.01);
}

TEST(Rng, IndexInRange) {
  Rng rng(4);
  for (int i = 0; i < 1000; ++i) EXPECT_LT(rng.index(7), 7u);
}

TEST(Simulator, SingleNoiselessObject) {
  ScenarioConfig c;
  c.num_objects = 1;
  c.num_frames = 20;
  c.appearance_noise = 0.0;
  c.dropout = 0.0;
  c.confusable_fraction = 0.0;
  const auto s = generate(c);
  ASSERT_EQ(s.frames.size(), 20u);
  for (const auto& f : s.frames) {
    ASSERT_EQ(f.detections.size(), 1u);
    EXPECT_NEAR((f.detections[0].embedding - s.frames[0].detections[0].embedding).norm(), 0.0, 1e-12);
  }
  for (const auto& r : s.ground_truth) EXPECT_EQ(r.true_id, 1);
}

TEST(Simulator, FullDropout) {
  ScenarioConfig c;
  c.dropout = 1.0;
  c.num_frames = 10;
  const auto s = generate(c);
  EXPECT_EQ(s.frames.size(), 10u);
  for (const auto& f : s.frames) EXPECT_TRUE(f.detections.empty());
  EXPECT_TRUE(s.ground_truth.empty());
}

TEST(Simulator, Deterministic) {
  const auto a = generate(ScenarioConfig{});
  const auto b = generate(ScenarioConfig{});
  EXPECT_EQ(io::format_detections(a.frames), io::format_detections(b.frames));
  EXPECT_EQ(io::format_embeddings(a.frames), io::format_embeddings(b.frames));
  EXPECT_EQ(io::format_features(a.frames), io::format_features(b.frames));
  EXPECT_EQ(io::format_ground_truth(a.ground_truth), io::format_ground_truth(b.ground_truth));
  ScenarioConfig other;
  other.seed = 8;
  EXPECT_NE(io::format_embeddings(a.frames), io::format_embeddings(generate(other).frames));
}

TEST(Simulator, Invariants) {
  const ScenarioConfig c;
  const auto s = generate(c);
  std::size_t total = 0;
  const double slack = c.camera_drift * c.num_frames;
  for (const auto& f : s.frames) {
    std::set<int> ids;
    for (const auto& d : f.detections) {
      EXPECT_NEAR(d.embedding.norm(), 1.0, 1e-6);
      EXPECT_EQ(d.embedding.size(), c.embed_dim);
      EXPECT_EQ(d.features.size(), c.raw_dim);
      EXPECT_GE(d.confidence, 0.1);
      EXPECT_LE(d.confidence, 1.0);
      EXPECT_GE(d.box.left(), -slack);
      EXPECT_LE(d.box.right(), c.arena_width + slack);
      EXPECT_GE(d.box.top(), -slack);
      EXPECT_LE(d.box.bottom(), c.arena_height + slack);
    }
    for (const auto& g : s.ground_truth) {
      if (g.frame == f.index) EXPECT_TRUE(ids.insert(g.true_id).second);
    }
    total += f.detections.size();
  }
  // Detection count within 3 sigma of the binomial expectation.
  const double n = double(c.num_objects) * c.num_frames;
  const double p = 1.0 - c.dropout;
  EXPECT_NEAR(double(total), n * p, 3.0 * std::sqrt(n * p * (1.0 - p)));
  EXPECT_EQ(total, s.ground_truth.size());
}

TEST(Simulator, RawFeaturesCarryIdentity) {
  ScenarioConfig c;
  c.num_frames = 5;
  const auto s = generate(c);
  const GroundTruth gt(s.ground_truth);
  const auto& f = s.frames[0].detections;
  const auto& g = s.frames[1].detections;
  for (const auto& a : f) {
    for (const auto& b : g) {
      if (gt.true_id(1, a.det_index) == gt.true_id(2, b.det_index)) {
        EXPECT_GT(a.features.normalized().dot(b.features.normalized()), 0.5);
      }
    }
  }
}

TEST(ScenarioConfig, ValidationNamesField) {
  ScenarioConfig c;
  c.dropout = 1.5;
  try {
    generate(c);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
    EXPECT_NE(std::string(e.what()).find("dropout"), std::string::npos);
  }
  c = ScenarioConfig{};
  c.embed_dim = 1;
  EXPECT_THROW(generate(c), Error);
  c = ScenarioConfig{};
  c.num_frames = 1;
  EXPECT_THROW(generate(c), Error);
  c = ScenarioConfig{};
  c.occlusion_noise_boost = 0.5;
  EXPECT_THROW(generate(c), Error);
}

}  // namespace
}  // namespace utrack
