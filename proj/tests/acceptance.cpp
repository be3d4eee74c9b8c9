// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "generators.hpp"
#include "utrack/assignment.hpp"
#include "utrack/contrastive.hpp"
#include "utrack/eval.hpp"
#include "utrack/geometry.hpp"
#include "utrack/io.hpp"
#include "utrack/simulator.hpp"
#include "utrack/tga.hpp"
#include "utrack/tracker.hpp"
#include "utrack/uncertainty.hpp"

using namespace utrack;
namespace fs = std::filesystem;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail, double seconds) {
  fmt::print("criterion {:>2}: {}  {} ({:.2f}s)\n", id, pass ? "PASS" : "FAIL", detail, seconds);
  if (!pass) ++failures;
}

void run(int id, const std::function<std::pair<bool, std::string>()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  std::pair<bool, std::string> r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {false, std::string("exception: ") + e.what()};
  }
  report(id, r.first, r.second, std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
}

std::pair<bool, std::string> formulas() {
  const UncertaintyMargins m;
  std::vector<Tracklet> two(2);
  two[0].id = 1;
  two[1].id = 2;
  const double bump = std::log(1.0 + 2.0 * std::log(3.0));  // Omega_2 = 1 + ln 3
  for (int f = 1; f <= 2; ++f) {
    two[0].records.push_back({f, 0, {0, 0, 1, 1}, 1.0, {}, 0.0});
    two[1].records.push_back({f, 0, {0, 0, 1, 1}, 1.0, {}, f == 2 ? bump : 0.0});
  }
  const auto w = source_anchor_weights(two, 2);
  const std::vector<double> deltas{0.0, std::log(2.0), std::log(3.0)};
  Embedding q(2), kp(2), kn(2);
  q << 1, 0;
  kp << 0.6, 0.8;
  kn << 0.6, -0.8;
  const std::vector<std::pair<double, double>> checks{
      {association_risk(0.5, 0.05), 0.7444405},
      {adaptive_threshold(0.5, m), 1.2909842},
      {association_uncertainty(0.4, 0.38, m).delta, 0.2703964},
      {association_uncertainty(0.9, 0.8, m).delta, -0.8754688},
      {tracklet_uncertainty(deltas), 2.0},
      {w.candidates[0].weight, 0.75},
      {w.candidates[1].weight, 0.25},
      {info_nce(ContrastiveBatch{q, kp, {kn}}), std::log(2.0)},
  };
  double worst = 0.0;
  for (const auto& [got, want] : checks) worst = std::max(worst, std::abs(got - want));
  return {worst < 1e-6, fmt::format("max abs error {:.3g} over {} worked values", worst, checks.size())};
}

std::pair<bool, std::string> sign_theorem() {
  const UncertaintyMargins m;
  constexpr int n = 200;
  auto at = [](int i) { return 0.01 + 0.98 * i / (n - 1); };
  int violations = 0, both_hold = 0, both_fail = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double c1 = at(i), c2 = at(j);
      const double d = association_uncertainty(c1, c2, m).delta;
      const bool low = c1 < m.m1, close = c2 > c1 - m.m2;
      if (low && close) {
        ++both_hold;
        violations += !(d > 0.0);
      }
      if (!low && !close) {
        ++both_fail;
        violations += !(d <= 0.0);
      }
      if (i + 1 < n) violations += !(association_uncertainty(at(i + 1), c2, m).delta < d);
      if (j + 1 < n) violations += !(association_uncertainty(c1, at(j + 1), m).delta > d);
    }
  }
  return {violations == 0,
          fmt::format("{} violations ({} both-hold, {} both-fail cells)", violations, both_hold, both_fail)};
}

std::pair<bool, std::string> assignment() {
  Rng rng(2023);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t k = 1 + rng.index(6);
    const auto m = testgen::matrix(rng, k, k, i % 4 == 0);
    mismatches += total_similarity(m, hungarian_max(m)) != total_similarity(m, brute_force_max(m));
  }
  for (int i = 0; i < 200; ++i) {
    const std::size_t r = 1 + rng.index(4), c = 1 + rng.index(7);
    const auto m = i % 2 == 0 ? testgen::matrix(rng, r, c) : testgen::matrix(rng, c, r);
    mismatches += total_similarity(m, hungarian_max(m)) != total_similarity(m, brute_force_max(m));
  }
  return {mismatches == 0, fmt::format("{} of 1200 totals differ", mismatches)};
}

std::pair<bool, std::string> affine_round_trip() {
  Rng rng(77);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const AffineTransform t = testgen::invertible_affine(rng);
    const auto src = testgen::spread_points(rng, 4);
    std::vector<Point2> dst;
    for (const auto& p : src) dst.push_back(t.apply(p));
    const AffineTransform s = solve_affine(src, dst);
    for (double e : {s.m11 - t.m11, s.m12 - t.m12, s.m13 - t.m13, s.m21 - t.m21, s.m22 - t.m22, s.m23 - t.m23}) {
      worst = std::max(worst, std::abs(e));
    }
  }
  double plan_worst = 0.0;
  for (int i = 0; i < 200; ++i) {
    Tracklet track;
    track.id = 1;
    const BoundingBox then = testgen::box(rng), now = testgen::box(rng);
    track.records.push_back({1, 0, then, 1.0, {}, 0.0});
    track.records.push_back({2, 0, now, 1.0, {}, 0.0});
    const auto plan = build_plan(track, 2, 1, 0.0, rng);
    const BoundingBox mapped = apply_affine(plan.transform, now);
    for (double e : {mapped.cx - then.cx, mapped.cy - then.cy, mapped.w - then.w, mapped.h - then.h}) {
      plan_worst = std::max(plan_worst, std::abs(e));
    }
  }
  return {worst < 1e-6 && plan_worst < 1e-9,
          fmt::format("max coefficient error {:.3g}, max plan box error {:.3g}", worst, plan_worst)};
}

std::pair<bool, std::string> gradient_check() {
  Rng rng(31);
  double worst = 0.0;
  constexpr double h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    ContrastiveBatch b;
    const int d = 4 + static_cast<int>(rng.index(29));
    b.query = testgen::unit_vector(rng, d);
    b.positive = testgen::unit_vector(rng, d);
    for (std::size_t k = 1 + rng.index(16); k > 0; --k) b.negatives.push_back(testgen::unit_vector(rng, d));
    const Embedding g = info_nce_grad(b);
    Embedding fd(d);
    for (int j = 0; j < d; ++j) {
      ContrastiveBatch plus = b, minus = b;
      plus.query(j) += h;
      minus.query(j) -= h;
      fd(j) = (info_nce(plus) - info_nce(minus)) / (2.0 * h);
    }
    worst = std::max(worst, (g - fd).norm() / std::max(g.norm(), fd.norm()));
  }
  return {worst < 1e-4, fmt::format("max relative error {:.3g} over 100 batches", worst)};
}

struct Ablation {
  SeparationReport separation;
  double accuracy = 0.0;
  std::size_t switches = 0;
};

Ablation run_tracker(const SimulatedScenario& scene, bool utl) {
  TrackerConfig cfg;
  cfg.utl_enabled = utl;
  const auto r = track_sequence(scene.frames, cfg);
  const GroundTruth gt(scene.ground_truth);
  return {uncertainty_separation(r.log, gt, {Stage::Matched}), pseudo_accuracy(r.tracklets, gt, 100).at(100),
          id_switches(r.tracklets, gt)};
}

std::string cli(const std::string& args) {
  const std::string cmd = std::string(UTRACK_CLI) + " " + args + " > /dev/null";
  if (std::system(cmd.c_str()) != 0) throw std::runtime_error("command failed: " + cmd);
  return cmd;
}

std::pair<bool, std::string> determinism() {
  const fs::path root = fs::temp_directory_path() / "utrack_acceptance";
  fs::remove_all(root);
  for (const char* run : {"a", "b"}) {
    const fs::path dir = root / run;
    fs::create_directories(dir);
    io::atomic_write(dir / "scenario.txt", "num_frames = 60\nseed = 11\n");
    cli(fmt::format("simulate --config {} --out {}", (dir / "scenario.txt").string(), (dir / "sim").string()));
    cli(fmt::format("track --dets {0}/sim/det.txt --embs {0}/sim/emb.csv --out {0}/res.txt --log {0}/log.txt",
                    dir.string()));
    cli(fmt::format("train --bundle {0}/sim --epochs 3 --lr 0.05 --seed 5 --out {0}/weights.txt", dir.string()));
  }
  int compared = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(root / "a")) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), root / "a");
    ++compared;
    differing += io::read_file(entry.path()) != io::read_file(root / "b" / rel);
  }
  fs::remove_all(root);
  return {compared == 9 && differing == 0, fmt::format("{} files compared, {} differ", compared, differing)};
}

}  // namespace

int main() {
  run(1, formulas);
  run(2, sign_theorem);
  run(3, assignment);
  run(4, affine_round_trip);
  run(5, gradient_check);

  const auto scene = generate(ScenarioConfig{});
  Ablation utl, base;
  run(6, [&] {
    utl = run_tracker(scene, true);
    base = run_tracker(scene, false);
    const auto& s = utl.separation;
    return std::pair{s.wrong_flag_rate() >= 0.5 && s.correct_certain_rate() >= 0.9,
                     fmt::format("wrong flagged {}/{} = {:.3f} (need >= 0.5), correct certain {}/{} = {:.3f} "
                                 "(need >= 0.9)",
                                 s.wrong_flagged_uncertain, s.wrong_total, s.wrong_flag_rate(),
                                 s.correct_flagged_certain, s.correct_total, s.correct_certain_rate())};
  });
  run(7, [&] {
    return std::pair{utl.accuracy >= 0.85 && utl.accuracy >= base.accuracy + 0.03,
                     fmt::format("accuracy at age 100: with verification {:.3f}, without {:.3f} (need >= 0.85 and "
                                 ">= +0.03)",
                                 utl.accuracy, base.accuracy)};
  });
  run(8, [&] {
    int wins = 0;
    std::string detail;
    for (std::uint64_t seed : {7, 1, 2, 3, 4, 5}) {
      ScenarioConfig c;
      c.seed = seed;
      const auto s = generate(c);
      const auto on = run_tracker(s, true), off = run_tracker(s, false);
      wins += on.switches <= off.switches;
      detail += fmt::format(" seed {}: {} vs {};", seed, on.switches, off.switches);
    }
    return std::pair{wins >= 4, fmt::format("{}/6 seeds with no more switches (need >= 4):{}", wins, detail)};
  });
  run(9, [&] {
    const GroundTruth gt(scene.ground_truth);
    TrainConfig cfg;
    Rng init_rng(cfg.seed);
    const auto init = similarity_delta(LinearEmbedder::random(32, 16, init_rng), scene.frames, gt);
    const auto guided = similarity_delta(train_embedder(scene.frames, cfg).embedder, scene.frames, gt);
    cfg.guided_anchors = false;
    const auto uniform = similarity_delta(train_embedder(scene.frames, cfg).embedder, scene.frames, gt);
    const bool pass = guided.mean > init.mean && guided.fraction_positive > init.fraction_positive &&
                      guided.mean >= uniform.mean;
    return std::pair{pass, fmt::format("mean delta init {:.4f} -> guided {:.4f} (uniform {:.4f}); fraction > 0 "
                                       "init {:.4f} -> guided {:.4f}",
                                       init.mean, guided.mean, uniform.mean, init.fraction_positive,
                                       guided.fraction_positive)};
  });
  run(10, determinism);
  return failures == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
