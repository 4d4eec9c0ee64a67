// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include "panfuse/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "panfuse/config.hpp"
#include "panfuse/gradcheck.hpp"
#include "panfuse/io.hpp"
#include "panfuse/metrics.hpp"
#include "panfuse/scheduler.hpp"
#include "panfuse/synth.hpp"

namespace panfuse {

namespace {

namespace fs = std::filesystem;

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string scientific(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

PipelineConfig config_or_default(const std::string& path) {
  return path.empty() ? PipelineConfig{} : load_pipeline_config(path);
}

int run_infer(const std::string& sem, const std::string& cen, const std::string& emb, const std::string& config,
              const std::string& out_path, std::ostream& out) {
  const PipelineConfig cfg = config_or_default(config);
  const DecoderOutputs heads{io::read_tensor(sem), io::read_tensor(cen), io::read_tensor(emb)};
  const PanopticMask mask = panoptic_inference(heads, cfg.postprocess);
  io::write_mask(out_path, mask);
  const auto instances = mask.instance_map.data();
  out << "instances " << (instances.empty() ? 0 : *std::max_element(instances.begin(), instances.end())) << "\n";
  return kExitOk;
}

int run_eval(const std::string& pred_path, const std::string& gt_path, const std::string& config, std::ostream& out) {
  const PipelineConfig cfg = config_or_default(config);
  const PanopticMask pred = io::read_mask(pred_path);
  const PanopticMask gt = io::read_mask(gt_path);
  const PQReport report = panoptic_quality(pred, gt, cfg.postprocess.stuff_classes);
  std::int32_t max_class = 0;
  for (const LabelMap* m : {&pred.class_map, &gt.class_map}) {
    for (std::int32_t c : m->data()) max_class = std::max(max_class, c);
  }
  const double miou = mean_iou(pred.class_map, gt.class_map, static_cast<std::size_t>(max_class) + 1);
  out << report.to_text() << "miou " << fixed(miou) << "\n";
  return kExitOk;
}

struct LossPaths {
  std::string sem, labels, cen, cen_gt, emb, instances, config;
};

int run_losses(const LossPaths& p, std::ostream& out) {
  const PipelineConfig cfg = config_or_default(p.config);
  const FeatureMap sem = io::read_tensor(p.sem);
  const LabelMap labels = io::read_mask(p.labels).class_map;
  const FeatureMap cen = io::read_tensor(p.cen);
  const FeatureMap cen_gt = io::read_tensor(p.cen_gt);
  const FeatureMap emb = io::read_tensor(p.emb);
  const LabelMap instance_ids = io::read_mask(p.instances).instance_map;

  if (cen_gt.channels() != 1) throw ShapeError("center target must have one channel, got " + cen_gt.shape().str());
  LabelMap target(cen_gt.height(), cen_gt.width());
  for (std::size_t i = 0; i < cen_gt.size(); ++i) {
    if (cen_gt[i] != 0.0 && cen_gt[i] != 1.0) throw ValidationError("center target must be binary");
    target[i] = cen_gt[i] == 1.0 ? 1 : 0;
  }
  const InstanceAnnotation ann{instance_ids, center_ground_truth(instance_ids)};

  const double l_sem = cross_entropy(sem, labels);
  const double l_cen = focal_loss(cen, target, cfg.focal);
  const EmbeddingLossTerms l_emb = embedding_loss(emb, ann, cfg.embedding);
  const double l_pan = panoptic_loss(l_sem, l_cen, l_emb.total, cfg.weights);
  out << "L_sem " << fixed(l_sem) << "\n"
      << "L_cen " << fixed(l_cen) << "\n"
      << "L_att " << fixed(l_emb.attraction) << "\n"
      << "L_rep " << fixed(l_emb.repulsion) << "\n"
      << "L_reg " << fixed(l_emb.regularization) << "\n"
      << "L_emb " << fixed(l_emb.total) << "\n"
      << "L_pan " << fixed(l_pan) << "\n";
  return kExitOk;
}

int run_gradcheck(const std::string& variant_name, std::uint64_t seed, std::size_t instances, std::ostream& out,
                  std::ostream& err) {
  std::vector<FusionVariant> variants;
  if (variant_name.empty() || variant_name == "all") {
    variants.assign(std::begin(kAllFusionVariants), std::end(kAllFusionVariants));
  } else if (const auto v = parse_fusion_variant(variant_name)) {
    variants.push_back(*v);
  } else {
    err << "gradcheck: unknown variant '" << variant_name
        << "' (expected addition, squeeze-excite, excite-only, residual-excite or all)\n";
    return kExitUsage;
  }

  std::vector<GradCheckResult> results;
  for (FusionVariant v : variants) results.push_back(check_fusion_gradients(v, seed, instances));
  results.push_back(check_focal_gradients(seed, instances));
  results.push_back(check_embedding_gradients(seed, instances));

  bool ok = true;
  double worst = 0.0;
  for (const auto& r : results) {
    out << r.name << " instances " << r.instances << " max_rel_error " << scientific(r.max_relative_error) << " "
        << (r.passed() ? "ok" : "FAIL") << "\n";
    ok = ok && r.passed();
    worst = std::max(worst, r.max_relative_error);
  }
  out << "max_rel_error " << scientific(worst) << " tolerance " << scientific(kGradCheckTolerance) << "\n";
  return ok ? kExitOk : kExitCheckFailed;
}

int run_synth(const std::string& spec_path, const std::string& out_dir, std::ostream& out) {
  const SceneSpec spec = load_scene_spec(spec_path);
  const Scene scene = generate(spec);
  const fs::path dir(out_dir);
  fs::create_directories(dir);

  const std::vector<std::pair<std::string, std::string>> files{
      {"sem", "sem.pten"}, {"cen", "cen.pten"}, {"emb", "emb.pten"}, {"cen_gt", "cen_gt.pten"}, {"gt", "gt.pmsk"}};
  io::write_tensor(dir / "sem.pten", scene.out.sem);
  io::write_tensor(dir / "cen.pten", scene.out.cen);
  io::write_tensor(dir / "emb.pten", scene.out.emb);
  io::write_tensor(dir / "cen_gt.pten", scene.center_target);
  io::write_mask(dir / "gt.pmsk", scene.gt);

  std::string manifest = "# synthetic panoptic scene\n";
  std::string spec_text = to_text(spec);
  for (std::size_t start = 0; start < spec_text.size();) {
    const auto end = spec_text.find('\n', start);
    manifest += "spec." + spec_text.substr(start, end - start) + "\n";
    start = end + 1;
  }
  manifest += "seed = " + std::to_string(spec.seed) + "\n";
  manifest += "instances = " + std::to_string(scene.annotation.num_instances()) + "\n";
  for (const auto& [key, name] : files) manifest += "file." + key + " = " + name + "\n";
  const std::vector<std::uint8_t> bytes(manifest.begin(), manifest.end());
  io::write_file(dir / "manifest.txt", bytes);

  out << manifest;
  return kExitOk;
}

int run_drop_sim(double p, std::uint64_t steps, std::uint64_t seed, std::ostream& out) {
  out << simulate(p, steps, seed).to_text();
  return kExitOk;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"RGB-D panoptic segmentation toolkit: fusion, losses, post-processing, metrics", "panfuse"};
  app.require_subcommand(1);

  std::string sem, cen, emb, config, out_path;
  auto* infer = app.add_subcommand("infer", "Run panoptic post-processing on decoder outputs");
  infer->add_option("--sem", sem, "Semantic probabilities (C x H x W tensor)")->required();
  infer->add_option("--cen", cen, "Center heatmap (1 x H x W tensor)")->required();
  infer->add_option("--emb", emb, "Embeddings (D x H x W tensor)")->required();
  infer->add_option("--config", config, "Pipeline config");
  infer->add_option("--out", out_path, "Output mask")->required();

  std::string pred, gt;
  auto* eval = app.add_subcommand("eval", "Print panoptic quality and mIoU");
  eval->add_option("--pred", pred, "Predicted mask")->required();
  eval->add_option("--gt", gt, "Ground-truth mask")->required();
  eval->add_option("--config", config, "Pipeline config");

  LossPaths lp;
  auto* losses = app.add_subcommand("losses", "Evaluate all training losses");
  losses->add_option("--sem", lp.sem, "Semantic probabilities")->required();
  losses->add_option("--labels", lp.labels, "Mask whose class map holds the labels")->required();
  losses->add_option("--cen", lp.cen, "Center heatmap")->required();
  losses->add_option("--cen-gt", lp.cen_gt, "Binary center target tensor")->required();
  losses->add_option("--emb", lp.emb, "Embeddings")->required();
  losses->add_option("--instances", lp.instances, "Mask whose instance map holds the instances")->required();
  losses->add_option("--config", lp.config, "Pipeline config");

  std::string variant;
  std::uint64_t seed = 0;
  std::size_t instances = 20;
  auto* gradcheck = app.add_subcommand("gradcheck", "Compare analytic gradients with central differences");
  gradcheck->add_option("--variant", variant, "addition | squeeze-excite | excite-only | residual-excite | all");
  gradcheck->add_option("--seed", seed, "Random seed");
  gradcheck->add_option("--instances", instances, "Random instances per check")->check(CLI::PositiveNumber);

  std::string spec_path, out_dir;
  auto* synth = app.add_subcommand("synth", "Write a synthetic scene with known ground truth");
  synth->add_option("--spec", spec_path, "Scene spec")->required();
  synth->add_option("--out-dir", out_dir, "Output directory")->required();

  double p_drop = 0.5;
  std::uint64_t steps = 0;
  std::uint64_t drop_seed = 0;
  auto* drop_sim = app.add_subcommand("drop-sim", "Simulate the modality-drop scheduler");
  drop_sim->add_option("--p", p_drop, "Drop probability")->required()->check(CLI::Range(0.0, 1.0));
  drop_sim->add_option("--steps", steps, "Number of steps")->required()->check(CLI::PositiveNumber);
  drop_sim->add_option("--seed", drop_seed, "Random seed")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*infer) return run_infer(sem, cen, emb, config, out_path, out);
    if (*eval) return run_eval(pred, gt, config, out);
    if (*losses) return run_losses(lp, out);
    if (*gradcheck) return run_gradcheck(variant, seed, instances, out, err);
    if (*synth) return run_synth(spec_path, out_dir, out);
    if (*drop_sim) return run_drop_sim(p_drop, steps, drop_seed, out);
  } catch (const FormatError& e) {
    err << "format error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const ShapeError& e) {
    err << "shape error: " << e.what() << "\n";
    return kExitFormat;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kExitFormat;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitCheckFailed;
  }
  return kExitUsage;
}

}  // namespace panfuse
