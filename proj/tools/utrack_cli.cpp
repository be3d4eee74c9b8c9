// Command-line front end: simulate, track, eval, augment, train, stats.
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <filesystem>
#include <iostream>
#include <optional>

#include "utrack/contrastive.hpp"
#include "utrack/error.hpp"
#include "utrack/eval.hpp"
#include "utrack/io.hpp"
#include "utrack/simulator.hpp"
#include "utrack/tga.hpp"
#include "utrack/tracker.hpp"

namespace fs = std::filesystem;
using namespace utrack;

namespace {

struct Bundle {
  std::vector<Frame> frames;
  std::vector<GroundTruthRecord> gt;
};

Bundle load_bundle(const fs::path& dir, bool need_features) {
  Bundle b;
  b.frames = io::read_detections(dir / "det.txt");
  const auto load = io::read_embeddings(dir / "emb.csv", b.frames);
  if (load.renormalized > 0) std::cerr << "warning: renormalized " << load.renormalized << " embeddings\n";
  if (need_features) io::read_features(dir / "raw.csv", b.frames);
  if (fs::exists(dir / "gt.txt")) b.gt = io::read_ground_truth(dir / "gt.txt");
  return b;
}

bool parse_switch(const std::string& v) { return v == "on"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uncertainty-aware tracking-by-association toolkit"};
  app.require_subcommand(1);

  // simulate
  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic scene with ground truth");
  std::string sim_config, sim_out;
  simulate->add_option("--config", sim_config, "key = value scenario file (defaults when omitted)");
  simulate->add_option("--out", sim_out, "output directory")->required();

  // track
  auto* track = app.add_subcommand("track", "Track detections with precomputed embeddings");
  std::string dets_path, embs_path, results_path, log_path, utl = "on";
  TrackerConfig tcfg;
  track->add_option("--dets", dets_path, "MOT-style detections")->required();
  track->add_option("--embs", embs_path, "embedding rows")->required();
  track->add_option("--out", results_path, "results file")->required();
  track->add_option("--utl", utl, "verification and rectification")->check(CLI::IsMember({"on", "off"}));
  track->add_option("--m1", tcfg.margins.m1, "similarity margin");
  track->add_option("--m2", tcfg.margins.m2, "competitor margin");
  track->add_option("--beta", tcfg.beta, "IoU gate of rectification");
  track->add_option("--K", tcfg.window, "rectification window");
  track->add_option("--log", log_path, "uncertainty log output");

  // eval
  auto* eval = app.add_subcommand("eval", "Score tracking results against ground truth");
  std::string eval_results, eval_gt, eval_log, eval_report;
  int max_age = 100;
  eval->add_option("--results", eval_results)->required();
  eval->add_option("--gt", eval_gt)->required();
  eval->add_option("--log", eval_log)->required();
  eval->add_option("--report", eval_report)->required();
  eval->add_option("--max-age", max_age)->check(CLI::PositiveNumber);

  // augment
  auto* augment = app.add_subcommand("augment", "Sample an anchor pair and print the augmentation plan");
  std::string aug_bundle;
  int aug_frame = 0;
  std::uint64_t aug_seed = 0;
  std::optional<double> aug_jitter;
  augment->add_option("--bundle", aug_bundle)->required();
  augment->add_option("--frame", aug_frame)->required();
  augment->add_option("--seed", aug_seed)->required();
  augment->add_option("--jitter", aug_jitter, "corner jitter in pixels (default 2% of anchor diagonal)");

  // train
  auto* train = app.add_subcommand("train", "Contrastive training of a linear embedder on pseudo-tracklets");
  std::string train_bundle, train_out, guided = "on";
  TrainConfig train_cfg;
  train->add_option("--bundle", train_bundle)->required();
  train->add_option("--epochs", train_cfg.epochs)->required()->check(CLI::NonNegativeNumber);
  train->add_option("--lr", train_cfg.lr)->required();
  train->add_option("--seed", train_cfg.seed)->required();
  train->add_option("--out", train_out, "weights file")->required();
  train->add_option("--batch-size", train_cfg.batch_size, "frame pairs per update");
  train->add_option("--guided", guided, "uncertainty-guided anchors")->check(CLI::IsMember({"on", "off"}));

  // stats
  auto* stats = app.add_subcommand("stats", "Print the uncertainty separation report");
  std::string stats_log, stats_gt;
  stats->add_option("--log", stats_log)->required();
  stats->add_option("--gt", stats_gt)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*simulate) {
      const ScenarioConfig cfg =
          sim_config.empty() ? ScenarioConfig{} : io::scenario_from_text(io::read_file(sim_config));
      const auto scene = generate(cfg);
      const fs::path out(sim_out);
      fs::create_directories(out);
      io::atomic_write(out / "det.txt", io::format_detections(scene.frames));
      io::atomic_write(out / "emb.csv", io::format_embeddings(scene.frames));
      io::atomic_write(out / "raw.csv", io::format_features(scene.frames));
      io::atomic_write(out / "gt.txt", io::format_ground_truth(scene.ground_truth));
      io::atomic_write(out / "config.txt", io::scenario_to_text(cfg));
    } else if (*track) {
      tcfg.utl_enabled = parse_switch(utl);
      auto frames = io::read_detections(dets_path);
      const auto load = io::read_embeddings(embs_path, frames);
      if (load.renormalized > 0) std::cerr << "warning: renormalized " << load.renormalized << " embeddings\n";
      const auto result = track_sequence(frames, tcfg);
      io::write_results(result.tracklets, results_path);
      if (!log_path.empty()) io::atomic_write(log_path, io::format_log(result.log));
    } else if (*eval) {
      const auto tracklets = io::read_results(eval_results);
      const auto records = io::read_ground_truth(eval_gt);
      const GroundTruth gt(records);
      const auto log = io::read_log(eval_log);
      const auto curve = pseudo_accuracy(tracklets, gt, max_age);
      const auto separation = uncertainty_separation(log, gt, {Stage::Matched});
      std::string report = fmt::format("tracklets: {}\nid_switches: {}\n", tracklets.size(), id_switches(tracklets, gt));
      const double final_acc = curve.at(max_age);
      report += final_acc >= 0.0 ? fmt::format("pseudo_accuracy_at_{}: {:.6f}\n", max_age, final_acc)
                                 : fmt::format("pseudo_accuracy_at_{}: n/a\n", max_age);
      report += separation.to_text();
      io::atomic_write(eval_report, report);
      io::atomic_write(eval_report + ".curve.csv", curve_to_text(curve));
      std::cout << report;
    } else if (*augment) {
      const auto bundle = load_bundle(aug_bundle, false);
      std::vector<Frame> prefix;
      for (const auto& f : bundle.frames) {
        if (f.index <= aug_frame) prefix.push_back(f);
      }
      if (prefix.empty() || prefix.back().index != aug_frame) {
        throw Error(ErrorCode::NoCandidates, "frame " + std::to_string(aug_frame) + " has no detections");
      }
      const auto tracked = track_sequence(prefix, TrackerConfig{});
      Rng rng(aug_seed);
      const int anchor_id = sample(source_anchor_weights(tracked.tracklets, aug_frame), rng);
      const Tracklet& anchor = tracked.tracklets[static_cast<std::size_t>(anchor_id - 1)];
      const int target = sample(target_anchor_weights(anchor, aug_frame), rng);
      const double jitter = aug_jitter.value_or(default_jitter(anchor.at_frame(aug_frame)->box));
      const auto plan = build_plan(anchor, aug_frame, target, jitter, rng);
      const auto& t = plan.transform;
      fmt::print("source_track_id: {}\ntarget_frame: {}\ntransform: {:.6f} {:.6f} {:.6f} {:.6f} {:.6f} {:.6f}\n",
                 plan.source_track_id, plan.target_frame, t.m11, t.m12, t.m13, t.m21, t.m22, t.m23);
      for (const auto& d : augment_detections(prefix.back().detections, plan)) {
        fmt::print("box: {},{:.6f},{:.6f},{:.6f},{:.6f}\n", d.det_index, d.box.left(), d.box.top(), d.box.w, d.box.h);
      }
    } else if (*train) {
      train_cfg.guided_anchors = parse_switch(guided);
      const auto bundle = load_bundle(train_bundle, true);
      const auto result = train_embedder(bundle.frames, train_cfg);
      io::atomic_write(train_out, io::format_weights(result.embedder));
      for (std::size_t e = 0; e < result.epoch_loss.size(); ++e) {
        fmt::print("epoch {} loss {:.6f}\n", e + 1, result.epoch_loss[e]);
      }
      if (!bundle.gt.empty()) {
        const GroundTruth gt(bundle.gt);
        fmt::print("similarity_delta_mean: {:.6f}\n", similarity_delta(result.embedder, bundle.frames, gt).mean);
      }
    } else if (*stats) {
      const auto log = io::read_log(stats_log);
      const auto records = io::read_ground_truth(stats_gt);
      std::cout << uncertainty_separation(log, GroundTruth(records)).to_text();
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
