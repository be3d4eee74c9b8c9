#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "utrack/error.hpp"
#include "utrack/tga.hpp"

namespace utrack {
namespace {

Tracklet track(int id, std::vector<std::pair<int, double>> frame_delta, BoundingBox box = {10, 10, 4, 8}) {
  Tracklet t;
  t.id = id;
  for (const auto& [f, d] : frame_delta) t.records.push_back({f, 0, box, 1.0, Eigen::VectorXd::Unit(2, 0), d});
  return t;
}

TEST(SourceWeights, SingleTracklet) {
  const std::vector<Tracklet> ts{track(4, {{1, 0}, {2, 0}})};
  const auto w = source_anchor_weights(ts, 2);
  ASSERT_EQ(w.candidates.size(), 1u);
  EXPECT_EQ(w.candidates[0].key, 4);
  EXPECT_DOUBLE_EQ(w.candidates[0].weight, 1.0);
}

TEST(SourceWeights, EqualOmegaIsUniform) {
  const std::vector<Tracklet> ts{track(1, {{1, 0}, {2, 0.3}}), track(2, {{1, 0.3}, {2, 0}})};
  const auto w = source_anchor_weights(ts, 2);
  EXPECT_NEAR(w.candidates[0].weight, 0.5, 1e-12);
  EXPECT_NEAR(w.candidates[1].weight, 0.5, 1e-12);
}

TEST(SourceWeights, SoftmaxOfNegativeOmega) {
  // Omega_1 = mean(e^0, e^0) = 1; Omega_2 = mean(e^0, e^{ln(1 + 2 ln 3)}) = 1 + ln 3.
  const std::vector<Tracklet> ts{track(1, {{1, 0}, {2, 0}}),
                                 track(2, {{1, 0}, {2, std::log(1.0 + 2.0 * std::log(3.0))}})};
  const auto w = source_anchor_weights(ts, 2);
  EXPECT_NEAR(w.candidates[0].weight, 0.75, 1e-12);
  EXPECT_NEAR(w.candidates[1].weight, 0.25, 1e-12);
}

TEST(SourceWeights, ExcludesAbsentAndNewborn) {
  const std::vector<Tracklet> ts{track(1, {{1, 0}, {2, 0}}), track(2, {{1, 0}}), track(3, {{2, 0}})};
  const auto w = source_anchor_weights(ts, 2);
  ASSERT_EQ(w.candidates.size(), 1u);
  EXPECT_EQ(w.candidates[0].key, 1);
  // History after the query frame does not count toward Omega.
  const std::vector<Tracklet> later{track(1, {{1, 0}, {2, 0}, {3, 5.0}}), track(2, {{1, 0}, {2, 0}})};
  EXPECT_NEAR(source_anchor_weights(later, 2).candidates[0].weight, 0.5, 1e-12);
}

TEST(SourceWeights, NoCandidates) {
  const std::vector<Tracklet> ts{track(1, {{1, 0}})};
  try {
    source_anchor_weights(ts, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoCandidates);
  }
}

TEST(TargetWeights, OneHistoricalFrame) {
  const auto w = target_anchor_weights(track(1, {{3, 0.7}, {5, 0}}), 5);
  ASSERT_EQ(w.candidates.size(), 1u);
  EXPECT_EQ(w.candidates[0].key, 3);
  EXPECT_DOUBLE_EQ(w.candidates[0].weight, 1.0);
}

TEST(TargetWeights, SoftmaxOfDelta) {
  const auto w = target_anchor_weights(track(1, {{1, 0}, {2, std::log(2.0)}, {3, 9.0}}), 3);
  ASSERT_EQ(w.candidates.size(), 2u);
  EXPECT_NEAR(w.candidates[0].weight, 1.0 / 3.0, 1e-12);
  EXPECT_NEAR(w.candidates[1].weight, 2.0 / 3.0, 1e-12);
}

TEST(TargetWeights, EqualDeltaIsUniform) {
  const auto w = target_anchor_weights(track(1, {{1, 0.2}, {2, 0.2}, {3, 0.2}, {4, 0.2}}), 4);
  for (const auto& c : w.candidates) EXPECT_NEAR(c.weight, 1.0 / 3.0, 1e-12);
}

TEST(TargetWeights, OffsetWindowAndErrors) {
  const auto w = target_anchor_weights(track(1, {{1, 0}, {5, 0}, {9, 0}, {10, 0}}), 10, 5);
  ASSERT_EQ(w.candidates.size(), 2u);
  EXPECT_EQ(w.candidates[0].key, 5);
  EXPECT_THROW(target_anchor_weights(track(1, {{4, 0}}), 4), Error);
}

TEST(Sample, DegenerateWeight) {
  const SamplingWeights w{{{7, 1.0}}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    EXPECT_EQ(sample(w, rng), 7);
  }
}

TEST(Sample, MonteCarloFrequency) {
  const SamplingWeights w{{{0, 0.75}, {1, 0.25}}};
  Rng rng(2024);
  int zeros = 0;
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) zeros += sample(w, rng) == 0;
  EXPECT_NEAR(static_cast<double>(zeros) / n, 0.75, 0.01);
}

TEST(Sample, Reproducible) {
  const SamplingWeights w{{{0, 0.2}, {1, 0.3}, {2, 0.5}}};
  Rng a(8), b(8);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(sample(w, a), sample(w, b));
}

Tracklet boxed(BoundingBox now, BoundingBox then) {
  Tracklet t;
  t.id = 3;
  t.records.push_back({1, 0, then, 1.0, Eigen::VectorXd::Unit(2, 0), 0.0});
  t.records.push_back({4, 0, now, 1.0, Eigen::VectorXd::Unit(2, 0), 0.0});
  return t;
}

TEST(BuildPlan, SameBoxIsIdentity) {
  Rng rng(1);
  const auto p = build_plan(boxed({3, 3, 2, 2}, {3, 3, 2, 2}), 4, 1, 0.0, rng);
  EXPECT_NEAR(p.transform.m11, 1, 1e-12);
  EXPECT_NEAR(p.transform.m13, 0, 1e-12);
  EXPECT_EQ(p.source_track_id, 3);
  EXPECT_EQ(p.target_frame, 1);
}

TEST(BuildPlan, CornerMapping) {
  Rng rng(1);
  const auto t = build_plan(boxed({0, 0, 2, 2}, {5, 5, 4, 2}), 4, 1, 0.0, rng).transform;
  EXPECT_NEAR(t.m11, 2, 1e-12);
  EXPECT_NEAR(t.m22, 1, 1e-12);
  EXPECT_NEAR(t.m12, 0, 1e-12);
  EXPECT_NEAR(t.m21, 0, 1e-12);
  EXPECT_NEAR(t.m13, 5, 1e-12);
  EXPECT_NEAR(t.m23, 5, 1e-12);
}

TEST(BuildPlan, JitterIsBoundedAndReproducible) {
  const BoundingBox now{50, 60, 20, 40}, then{70, 65, 24, 44};
  Rng a(5), b(5);
  const auto pa = build_plan(boxed(now, then), 4, 1, 1.5, a);
  const auto pb = build_plan(boxed(now, then), 4, 1, 1.5, b);
  EXPECT_EQ(pa.transform.m11, pb.transform.m11);
  EXPECT_EQ(pa.transform.m23, pb.transform.m23);
  const auto src = now.corners();
  const auto dst = then.corners();
  for (int i = 0; i < 4; ++i) {
    const Point2 q = pa.transform.apply(src[static_cast<std::size_t>(i)]);
    EXPECT_LE(std::abs(q.x - dst[static_cast<std::size_t>(i)].x), 1.5 * 2);
    EXPECT_LE(std::abs(q.y - dst[static_cast<std::size_t>(i)].y), 1.5 * 2);
  }
}

TEST(BuildPlan, Errors) {
  Rng rng(1);
  EXPECT_THROW(build_plan(boxed({0, 0, 2, 2}, {0, 0, 2, 2}), 4, 2, 0.0, rng), Error);
  EXPECT_THROW(build_plan(boxed({0, 0, 2, 2}, {0, 0, 2, 2}), 1, 4, 0.0, rng), Error);
  try {
    build_plan(boxed({0, 0, 2, 2}, {0, 0, 0, 2}), 4, 1, 0.0, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateBox);
  }
}

TEST(DefaultJitter, TwoPercentOfDiagonal) { EXPECT_NEAR(default_jitter({0, 0, 30, 40}), 1.0, 1e-12); }

TEST(Augment, IdentityAndTranslation) {
  std::vector<Detection> dets;
  for (int i = 0; i < 3; ++i) dets.push_back({1, i, {10.0 * i, 5, 2, 3}, 0.9, Eigen::VectorXd::Unit(2, 0), {}});
  AugmentationPlan id;
  const auto same = augment_detections(dets, id);
  for (int i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(same[static_cast<std::size_t>(i)].box.cx, 10.0 * i);
  AugmentationPlan shift;
  shift.transform = AffineTransform::translation(4, -1);
  const auto moved = augment_detections(dets, shift);
  for (int i = 0; i < 3; ++i) {
    EXPECT_DOUBLE_EQ(moved[static_cast<std::size_t>(i)].box.cx, 10.0 * i + 4);
    EXPECT_DOUBLE_EQ(moved[static_cast<std::size_t>(i)].box.cy, 4);
    EXPECT_DOUBLE_EQ(moved[static_cast<std::size_t>(i)].confidence, 0.9);
  }
}

TEST(Augment, AnchorLandsOnTargetBox) {
  const BoundingBox now{50, 60, 20, 40}, then{70, 65, 24, 44};
  Rng rng(3);
  const auto plan = build_plan(boxed(now, then), 4, 1, 0.0, rng);
  const std::vector<Detection> dets{{4, 0, now, 1.0, Eigen::VectorXd::Unit(2, 0), {}}};
  const auto b = augment_detections(dets, plan)[0].box;
  EXPECT_NEAR(b.cx, then.cx, 1e-9);
  EXPECT_NEAR(b.cy, then.cy, 1e-9);
  EXPECT_NEAR(b.w, then.w, 1e-9);
  EXPECT_NEAR(b.h, then.h, 1e-9);
}

}  // namespace
}  // namespace utrack
